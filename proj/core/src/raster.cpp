#include "cpcr/raster.hpp"

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "cpcr/error.hpp"

namespace cpcr {

Raster to_rgb(const Raster& r) {
  if (r.channels == 3) return r;
  Raster out(r.width, r.height, 3);
  for (std::size_t i = 0; i < r.pixels.size(); ++i) {
    out.pixels[3 * i] = out.pixels[3 * i + 1] = out.pixels[3 * i + 2] = r.pixels[i];
  }
  return out;
}

Raster to_gray(const Raster& r) {
  if (r.channels == 1) return r;
  Raster out(r.width, r.height, 1);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const unsigned sum = r.pixels[3 * i] + r.pixels[3 * i + 1] + r.pixels[3 * i + 2];
    out.pixels[i] = static_cast<std::uint8_t>((2 * sum + 3) / 6);
  }
  return out;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err) *err = msg;
  png_longjmp(png, 1);
}

std::string extension(const std::string& path) {
  auto ext = std::filesystem::path(path).extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

}  // namespace

void write_png(const Raster& r, const std::string& path) {
  if (r.channels != 1 && r.channels != 3) throw ConfigError("png: only gray or RGB rasters");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DataError("cannot write '" + path + "'");

  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DataError("png: out of memory");
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(r.height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("png write '" + path + "': " + error);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(r.width), static_cast<png_uint_32>(r.height), 8,
               r.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  for (int y = 0; y < r.height; ++y)
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(r.pixels.data() + r.index(0, y));
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
}

Raster read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DataError("cannot open '" + path + "'");

  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("png: out of memory");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("png read '" + path + "': " + error);
  }
  png_init_io(png, fp.get());
  png_read_png(png, info,
               PNG_TRANSFORM_STRIP_16 | PNG_TRANSFORM_PACKING | PNG_TRANSFORM_EXPAND | PNG_TRANSFORM_STRIP_ALPHA,
               nullptr);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int ch = png_get_channels(png, info);
  if (ch != 1 && ch != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("png read '" + path + "': unsupported channel count " + std::to_string(ch));
  }
  Raster r(w, h, ch);
  png_bytepp rows = png_get_rows(png, info);
  for (int y = 0; y < h; ++y) {
    std::copy_n(rows[y], static_cast<std::size_t>(w) * ch, r.pixels.begin() + static_cast<std::ptrdiff_t>(r.index(0, y)));
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return r;
}

void write_pnm(const Raster& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << (r.channels == 1 ? "P5" : "P6") << '\n' << r.width << ' ' << r.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
}

Raster read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6") throw DataError("'" + path + "': not a binary PGM/PPM");
  auto next_int = [&] {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      in >> std::ws;
    }
    int v = 0;
    if (!(in >> v)) throw DataError("'" + path + "': malformed header");
    return v;
  };
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (maxval != 255) throw DataError("'" + path + "': only 8-bit images supported");
  in.get();
  Raster r(w, h, magic == "P5" ? 1 : 3);
  in.read(reinterpret_cast<char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
  if (!in) throw DataError("'" + path + "': truncated pixel data");
  return r;
}

void write_image(const Raster& r, const std::string& path) {
  const auto ext = extension(path);
  if (ext == ".png") return write_png(r, path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return write_pnm(r, path);
  throw ConfigError("unsupported image extension '" + ext + "'");
}

Raster read_image(const std::string& path) {
  const auto ext = extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pnm(path);
  throw ConfigError("unsupported image extension '" + ext + "'");
}

}  // namespace cpcr
