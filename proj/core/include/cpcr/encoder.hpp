#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cpcr/data.hpp"
#include "cpcr/raster.hpp"

namespace cpcr {

enum class Origin { upper_left, lower_left };
enum class Collision { overwrite_last, cross_adjacent, spiral_adjacent, strip_split, darkest_wins };
enum class ColorMode { grayscale, red_levels, random_rgb };
enum class Marker { cell, plus };

/// Visual directions on the rendered image; their grid offsets depend on the
/// origin (up is y - 1 with an upper-left origin, y + 1 with a lower-left one).
enum class Direction { right, down, left, up, lower_right, lower_left, upper_right, upper_left };

/// Attribute order consumed as consecutive pairs (order[0], order[1]), ...
struct Pairing {
  std::vector<int> order;

  static Pairing identity(std::size_t n);
  /// Throws ConfigError unless `order` is a permutation of 0..n-1 with n even.
  void validate(std::size_t n) const;
  std::size_t pair_count() const { return order.size() / 2; }
  bool operator==(const Pairing&) const = default;
};

/// Gray levels encoding pair order, darkest (first pair) first.
struct IntensitySchedule {
  std::vector<int> levels;

  /// Strictly increasing, all levels in [0, 254].
  void validate() const;
  std::size_t size() const { return levels.size(); }
  bool operator==(const IntensitySchedule&) const = default;
};

/// levels[k] = floor(k * 255 / m), 1 <= m <= 255.
IntensitySchedule default_schedule(int pair_count);

inline constexpr std::array<Direction, 4> kCrossOrder = {Direction::right, Direction::left, Direction::up,
                                                         Direction::down};
inline constexpr std::array<Direction, 8> kSpiralOrder = {
    Direction::right,       Direction::down,       Direction::left,        Direction::up,
    Direction::lower_right, Direction::lower_left, Direction::upper_right, Direction::upper_left};

/// Edge-neighbour fill order starting at `start`, turning clockwise or
/// counter-clockwise on screen.
std::vector<Direction> cross_rotation(Direction start, bool clockwise);

struct EncodingConfig {
  int grid = 10;
  Origin origin = Origin::upper_left;
  int cell_px = 1;
  Collision collision = Collision::overwrite_last;
  /// Empty means default_schedule(pair count).
  IntensitySchedule schedule;
  ColorMode color = ColorMode::grayscale;
  Marker marker = Marker::cell;
  std::uint64_t rgb_seed = 0;
  /// Neighbour order for cross_adjacent; a permutation of the 4 edge directions.
  std::vector<Direction> cross_order{kCrossOrder.begin(), kCrossOrder.end()};

  int image_side() const { return grid * cell_px; }
  /// The configured schedule, or the default one, checked against `pair_count`.
  IntensitySchedule resolved_schedule(std::size_t pair_count) const;
  void validate() const;
  bool operator==(const EncodingConfig&) const = default;
};

/// 1-based grid coordinates: x is the first value of a pair, y the second.
struct GridCell {
  int x = 0;
  int y = 0;
  bool operator==(const GridCell&) const = default;
  auto operator<=>(const GridCell&) const = default;
};

/// Grid offset of a visual direction under an origin convention.
GridCell step(GridCell c, Direction d, Origin origin);

struct CollisionEvent {
  enum class Kind {
    displaced,    // moved to an adjacent free cell
    overwritten,  // replaced an earlier pair in the cell
    merged,       // kept out by a darker pair already in the cell
    stripped,     // shares the cell as an extra strip
    overflow      // no free neighbour: merged into the nominal cell
  };
  std::size_t pair = 0;
  GridCell intended;
  GridCell placed;
  Kind kind = Kind::displaced;
};

/// Which pairs occupy each grid cell after collision resolution.
struct CellPlacement {
  int grid = 0;
  /// Row-major over (y - 1) * grid + (x - 1). A cell holds one pair index,
  /// or several for strip_split, in pair order.
  std::vector<std::vector<std::size_t>> cells;
  std::vector<CollisionEvent> log;
  std::vector<std::string> warnings;
  std::size_t pair_count = 0;

  const std::vector<std::size_t>& at(GridCell c) const {
    return cells[static_cast<std::size_t>(c.y - 1) * grid + static_cast<std::size_t>(c.x - 1)];
  }
  std::vector<std::size_t>& at(GridCell c) {
    return cells[static_cast<std::size_t>(c.y - 1) * grid + static_cast<std::size_t>(c.x - 1)];
  }
  bool inside(GridCell c) const { return c.x >= 1 && c.y >= 1 && c.x <= grid && c.y <= grid; }
  /// Number of pair references held by all cells.
  std::size_t placed_references() const;
  /// Cell currently holding pair k, if it is visible.
  std::optional<GridCell> cell_of(std::size_t pair) const;
};

struct CpcrImage {
  Raster raster;
  EncodingConfig config;
  std::size_t case_id = 0;
  int label = 0;
};

using ValuePair = std::pair<int, int>;

std::vector<ValuePair> pair_split(const DiscretePoint& point, const Pairing& pairing);
CellPlacement place_pairs(const std::vector<ValuePair>& pairs, const EncodingConfig& config);
CpcrImage render(const CellPlacement& placement, const EncodingConfig& config);
CpcrImage encode(const DiscretePoint& point, const Pairing& pairing, const EncodingConfig& config);
std::vector<CpcrImage> encode_all(const DiscreteDataset& data, const Pairing& pairing, const EncodingConfig& config);

/// Recovers the point from a grayscale image. Supports overwrite_last,
/// cross_adjacent and spiral_adjacent. A pair sitting on the first free
/// fill-order neighbour of an earlier pair's cell is read as displaced from
/// that cell. When several cells qualify, one whose occupant sits at its own
/// nominal position is preferred. Throws DecodeError when a schedule level is
/// missing or the candidates still tie.
DiscretePoint decode(const CpcrImage& image, const Pairing& pairing, const EncodingConfig& config);

class DecodeError : public std::runtime_error {
 public:
  enum class Kind { missing_level, ambiguous, unsupported, malformed };
  DecodeError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Strip widths for `count` pairs sharing one cell: as even as possible,
/// wider strips first, summing to cell_px.
std::vector<int> strip_widths(int cell_px, int count);

/// RGB triple per pair index for random_rgb, each channel uniform in [0, 200].
std::vector<std::array<std::uint8_t, 3>> random_palette(std::size_t pair_count, std::uint64_t seed);

/// Pixel rectangle [x0, x1) x [y0, y1) covered by a grid cell.
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};
PixelRect cell_rect(GridCell c, const EncodingConfig& config);

std::string to_string(Origin o);
std::string to_string(Collision c);
std::string to_string(ColorMode c);
std::string to_string(Marker m);
std::string to_string(Direction d);
Origin parse_origin(const std::string& s);
Collision parse_collision(const std::string& s);
ColorMode parse_color(const std::string& s);
Marker parse_marker(const std::string& s);
Direction parse_direction(const std::string& s);

}  // namespace cpcr
