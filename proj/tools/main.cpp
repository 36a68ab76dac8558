#include "cli.hpp"

int main(int argc, char** argv) { return cpcr::cli::run(argc, argv); }
