#include "cpcr/context.hpp"

#include <algorithm>
#include <cmath>

#include "cpcr/error.hpp"

namespace cpcr {

Raster MeanImage::to_raster() const {
  Raster r(width, height, channels);
  for (std::size_t i = 0; i < pixels.size(); ++i)
    r.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::floor(pixels[i] + 0.5), 0.0, 255.0));
  return r;
}

MeanImage class_mean(const std::vector<CpcrImage>& images, int label) {
  if (images.empty()) throw DataError("class mean: no images for label " + std::to_string(label));
  const auto& first = images.front().raster;
  MeanImage m;
  m.width = first.width;
  m.height = first.height;
  m.channels = first.channels;
  m.label = label;
  m.pixels.assign(first.pixels.size(), 0.0);
  for (const auto& img : images) {
    const auto& r = img.raster;
    if (r.width != m.width || r.height != m.height || r.channels != m.channels)
      throw DataError("class mean: image dimensions differ");
    for (std::size_t i = 0; i < r.pixels.size(); ++i) m.pixels[i] += r.pixels[i];
    m.case_ids.push_back(img.case_id);
  }
  m.count = images.size();
  const double inv = 1.0 / static_cast<double>(m.count);
  for (auto& v : m.pixels) v *= inv;
  return m;
}

std::vector<MeanImage> class_means(const std::vector<CpcrImage>& images, std::size_t class_count) {
  std::vector<std::vector<CpcrImage>> by_class(class_count);
  for (const auto& img : images) {
    if (img.label < 0 || static_cast<std::size_t>(img.label) >= class_count)
      throw DataError("class mean: label " + std::to_string(img.label) + " outside class set");
    by_class[static_cast<std::size_t>(img.label)].push_back(img);
  }
  std::vector<MeanImage> means;
  means.reserve(class_count);
  for (std::size_t c = 0; c < class_count; ++c) means.push_back(class_mean(by_class[c], static_cast<int>(c)));
  return means;
}

Raster compose_double(const Raster& case_image, const std::vector<MeanImage>& means, MeanRender render) {
  if (means.empty()) throw ConfigError("compose: need at least one class mean");
  std::vector<Raster> backgrounds;
  backgrounds.reserve(means.size());
  for (const auto& m : means) {
    if (m.width != case_image.width || m.height != case_image.height)
      throw DataError("compose: mean and case dimensions differ");
    backgrounds.push_back(render == MeanRender::gray ? to_gray(m.to_raster()) : m.to_raster());
  }
  int channels = case_image.channels;
  for (const auto& b : backgrounds) channels = std::max(channels, b.channels);
  const Raster fg = channels == 3 ? to_rgb(case_image) : case_image;

  const int w = case_image.width;
  const int h = case_image.height;
  Raster out(w * static_cast<int>(means.size()), h, channels);
  for (std::size_t i = 0; i < backgrounds.size(); ++i) {
    const Raster bg = channels == 3 ? to_rgb(backgrounds[i]) : backgrounds[i];
    const int ox = static_cast<int>(i) * w;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Raster& src = fg.occupied(x, y) ? fg : bg;
        for (int c = 0; c < channels; ++c) out.at(ox + x, y, c) = src.at(x, y, c);
      }
    }
  }
  return out;
}

Raster pad_square(const Raster& image) {
  if (image.height <= 0 || image.width % image.height != 0)
    throw DataError("pad: width " + std::to_string(image.width) + " is not a multiple of height " +
                    std::to_string(image.height));
  const int side = image.width;
  const int top = (side - image.height) / 2;
  Raster out(side, side, image.channels);
  for (int y = 0; y < image.height; ++y) {
    std::copy_n(image.pixels.begin() + static_cast<std::ptrdiff_t>(image.index(0, y)),
                static_cast<std::size_t>(side) * image.channels,
                out.pixels.begin() + static_cast<std::ptrdiff_t>(out.index(0, y + top)));
  }
  return out;
}

Raster context_image(const Raster& case_image, const std::vector<MeanImage>& means, MeanRender render) {
  return pad_square(compose_double(case_image, means, render));
}

std::string to_string(MeanRender r) { return r == MeanRender::gray ? "gray" : "own"; }

MeanRender parse_mean_render(const std::string& s) {
  if (s == "gray") return MeanRender::gray;
  if (s == "own") return MeanRender::own;
  throw ConfigError("unknown mean rendering '" + s + "' (expected own or gray)");
}

}  // namespace cpcr
