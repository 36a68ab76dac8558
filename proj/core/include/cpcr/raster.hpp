#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cpcr {

inline constexpr std::uint8_t kBackground = 255;

/// 8-bit raster, row-major with interleaved channels (1 = gray, 3 = RGB).
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  Raster() = default;
  Raster(int w, int h, int ch, std::uint8_t fill = kBackground)
      : width(w), height(h), channels(ch), pixels(static_cast<std::size_t>(w) * h * ch, fill) {}

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::uint8_t& at(int x, int y, int c = 0) { return pixels[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c = 0) const { return pixels[index(x, y, c)]; }

  /// True when any channel of pixel (x, y) differs from white.
  bool occupied(int x, int y) const {
    for (int c = 0; c < channels; ++c)
      if (at(x, y, c) != kBackground) return true;
    return false;
  }

  bool operator==(const Raster&) const = default;
};

/// Gray -> RGB by channel replication; RGB input is returned unchanged.
Raster to_rgb(const Raster& r);
/// RGB -> gray by channel average (rounded half up); gray input unchanged.
Raster to_gray(const Raster& r);

void write_png(const Raster& r, const std::string& path);
Raster read_png(const std::string& path);
/// Binary PGM (gray) or PPM (RGB), chosen by channel count.
void write_pnm(const Raster& r, const std::string& path);
Raster read_pnm(const std::string& path);
/// Dispatches on the file extension (.png, .pgm, .ppm).
void write_image(const Raster& r, const std::string& path);
Raster read_image(const std::string& path);

}  // namespace cpcr
