#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cpcr/serialize.hpp"

namespace cpcr::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2 };

struct SynthOptions {
  int dim = 2;
  int n_per_class = 500;
  double noise = 0.0;
  bool operator==(const SynthOptions&) const = default;
};

/// Everything a run depends on. Written as run_config.json into the output
/// directory; passing it back through --config repeats the run.
struct RunConfig {
  std::string command;
  std::string data;
  std::string label_col;  // name or 0-based index; empty = last column
  std::string binning = "uniform";
  bool clamp = true;
  EncodingConfig encoding;
  Pairing pairing;  // empty = identity
  ContextOptions context;
  TrainConfig train;
  int folds = 10;
  bool stratified = false;
  std::uint64_t fold_seed = 0;
  SearchSpec search;
  int outer_fold = 1;
  std::vector<std::size_t> cases;
  std::vector<int> cells;
  int block = 2;
  int class_index = -1;  // saliency target; -1 = predicted class
  SynthOptions synth;
  std::uint64_t synth_seed = 0;
  std::string image;
  std::string sidecar;
  std::string out = "out";
  unsigned jobs = 1;

  bool operator==(const RunConfig&) const = default;
};

void to_json(json& j, const RunConfig& c);
void from_json(const json& j, RunConfig& c);

/// Builds the schema named by --binning: uniform, identity or range:LO:HI.
BinningSchema make_binning(const std::string& spec, const Dataset& data, int grid, bool clamp);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace cpcr::cli
