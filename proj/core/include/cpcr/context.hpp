#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cpcr/encoder.hpp"
#include "cpcr/raster.hpp"

namespace cpcr {

/// Pixel-wise average of one class's images, kept in full precision.
struct MeanImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> pixels;
  int label = 0;
  std::size_t count = 0;
  /// Cases that contributed, for fold-locality checks.
  std::vector<std::size_t> case_ids;

  /// 8-bit rendering, rounding half up.
  Raster to_raster() const;
};

MeanImage class_mean(const std::vector<CpcrImage>& images, int label);
/// Means for labels 0..class_count-1 from the images whose label matches.
std::vector<MeanImage> class_means(const std::vector<CpcrImage>& images, std::size_t class_count);

/// How the class means are drawn behind a case.
enum class MeanRender { own, gray };

/// Overlays the case on each mean (non-white case pixels win) and places the
/// overlays side by side: w x h case, c means -> (c*w) x h. Gray and RGB
/// inputs are promoted to RGB when they differ.
Raster compose_double(const Raster& case_image, const std::vector<MeanImage>& means,
                      MeanRender render = MeanRender::own);
/// Adds white rows (extra one at the bottom when odd) to make a
/// (c*h) x h raster square.
Raster pad_square(const Raster& image);

/// compose_double followed by pad_square.
Raster context_image(const Raster& case_image, const std::vector<MeanImage>& means,
                     MeanRender render = MeanRender::own);

std::string to_string(MeanRender r);
MeanRender parse_mean_render(const std::string& s);

}  // namespace cpcr
