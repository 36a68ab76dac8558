#include "cpcr/encoder.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "cpcr/error.hpp"
#include "cpcr/seed.hpp"

namespace cpcr {

// ---------------------------------------------------------------------------
// Pairing, schedules, config

Pairing Pairing::identity(std::size_t n) {
  Pairing p;
  p.order.resize(n);
  std::iota(p.order.begin(), p.order.end(), 0);
  return p;
}

void Pairing::validate(std::size_t n) const {
  if (order.size() != n) {
    throw ConfigError("pairing covers " + std::to_string(order.size()) + " attributes, point has " +
                      std::to_string(n));
  }
  if (n == 0 || n % 2 != 0) throw ConfigError("pairing needs an even, non-zero attribute count");
  std::vector<bool> seen(n, false);
  for (int i : order) {
    if (i < 0 || static_cast<std::size_t>(i) >= n || seen[static_cast<std::size_t>(i)])
      throw ConfigError("pairing is not a permutation of 0.." + std::to_string(n - 1));
    seen[static_cast<std::size_t>(i)] = true;
  }
}

void IntensitySchedule::validate() const {
  if (levels.empty()) throw ConfigError("intensity schedule is empty");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (levels[k] < 0 || levels[k] >= kBackground)
      throw ConfigError("intensity level " + std::to_string(levels[k]) + " outside [0, 254]");
    if (k > 0 && levels[k] <= levels[k - 1]) throw ConfigError("intensity schedule must be strictly increasing");
  }
}

IntensitySchedule default_schedule(int pair_count) {
  if (pair_count < 1 || pair_count > 255) throw ConfigError("default schedule: pair count must be in [1, 255]");
  IntensitySchedule s;
  s.levels.resize(static_cast<std::size_t>(pair_count));
  for (int k = 0; k < pair_count; ++k) s.levels[static_cast<std::size_t>(k)] = k * 255 / pair_count;
  return s;
}

std::vector<Direction> cross_rotation(Direction start, bool clockwise) {
  static constexpr std::array<Direction, 4> cw = {Direction::right, Direction::down, Direction::left, Direction::up};
  const auto it = std::find(cw.begin(), cw.end(), start);
  if (it == cw.end()) throw ConfigError("cross fill must start at an edge neighbour");
  const auto first = static_cast<int>(it - cw.begin());
  std::vector<Direction> out;
  for (int i = 0; i < 4; ++i) {
    const int idx = clockwise ? (first + i) % 4 : (first - i + 4) % 4;
    out.push_back(cw[static_cast<std::size_t>(idx)]);
  }
  return out;
}

IntensitySchedule EncodingConfig::resolved_schedule(std::size_t pair_count) const {
  if (schedule.levels.empty()) return default_schedule(static_cast<int>(pair_count));
  if (schedule.size() != pair_count) {
    throw ConfigError("intensity schedule has " + std::to_string(schedule.size()) + " levels for " +
                      std::to_string(pair_count) + " pairs");
  }
  schedule.validate();
  return schedule;
}

void EncodingConfig::validate() const {
  if (grid < 2) throw ConfigError("grid must be >= 2");
  if (cell_px < 1) throw ConfigError("cell_px must be >= 1");
  if (!schedule.levels.empty()) schedule.validate();
  if (cross_order.size() != 4) throw ConfigError("cross order needs the 4 edge directions");
  for (auto d : {Direction::right, Direction::down, Direction::left, Direction::up}) {
    if (std::count(cross_order.begin(), cross_order.end(), d) != 1)
      throw ConfigError("cross order must be a permutation of right, down, left, up");
  }
}

GridCell step(GridCell c, Direction d, Origin origin) {
  // Visual "down" is +y when rows grow downwards (upper-left origin).
  const int down = origin == Origin::upper_left ? 1 : -1;
  switch (d) {
    case Direction::right: return {c.x + 1, c.y};
    case Direction::left: return {c.x - 1, c.y};
    case Direction::down: return {c.x, c.y + down};
    case Direction::up: return {c.x, c.y - down};
    case Direction::lower_right: return {c.x + 1, c.y + down};
    case Direction::lower_left: return {c.x - 1, c.y + down};
    case Direction::upper_right: return {c.x + 1, c.y - down};
    case Direction::upper_left: return {c.x - 1, c.y - down};
  }
  return c;
}

namespace {

Direction opposite(Direction d) {
  switch (d) {
    case Direction::right: return Direction::left;
    case Direction::left: return Direction::right;
    case Direction::down: return Direction::up;
    case Direction::up: return Direction::down;
    case Direction::lower_right: return Direction::upper_left;
    case Direction::upper_left: return Direction::lower_right;
    case Direction::lower_left: return Direction::upper_right;
    case Direction::upper_right: return Direction::lower_left;
  }
  return d;
}

std::vector<Direction> fill_order(const EncodingConfig& config) {
  if (config.collision == Collision::spiral_adjacent) return {kSpiralOrder.begin(), kSpiralOrder.end()};
  return config.cross_order;
}

std::string cell_str(GridCell c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

}  // namespace

// ---------------------------------------------------------------------------
// Placement

std::size_t CellPlacement::placed_references() const {
  std::size_t n = 0;
  for (const auto& c : cells) n += c.size();
  return n;
}

std::optional<GridCell> CellPlacement::cell_of(std::size_t pair) const {
  for (int y = 1; y <= grid; ++y) {
    for (int x = 1; x <= grid; ++x) {
      const auto& occ = at({x, y});
      if (std::find(occ.begin(), occ.end(), pair) != occ.end()) return GridCell{x, y};
    }
  }
  return std::nullopt;
}

std::vector<ValuePair> pair_split(const DiscretePoint& point, const Pairing& pairing) {
  if (point.values.size() % 2 != 0) throw ConfigError("point length must be even (pad odd points first)");
  pairing.validate(point.values.size());
  std::vector<ValuePair> pairs;
  pairs.reserve(pairing.pair_count());
  for (std::size_t k = 0; k < pairing.pair_count(); ++k) {
    pairs.emplace_back(point.values[static_cast<std::size_t>(pairing.order[2 * k])],
                       point.values[static_cast<std::size_t>(pairing.order[2 * k + 1])]);
  }
  return pairs;
}

CellPlacement place_pairs(const std::vector<ValuePair>& pairs, const EncodingConfig& config) {
  config.validate();
  const auto schedule = config.resolved_schedule(pairs.size());
  CellPlacement pl;
  pl.grid = config.grid;
  pl.pair_count = pairs.size();
  pl.cells.assign(static_cast<std::size_t>(config.grid) * config.grid, {});

  const auto order = fill_order(config);
  auto keep_darkest = [&](std::vector<std::size_t>& occ, std::size_t k) {
    if (schedule.levels[k] < schedule.levels[occ.front()]) occ.front() = k;
  };

  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const GridCell c{pairs[k].first, pairs[k].second};
    if (!pl.inside(c)) {
      throw DataError("pair " + std::to_string(k) + " value " + cell_str(c) + " outside grid 1.." +
                      std::to_string(config.grid));
    }
    auto& occ = pl.at(c);
    if (occ.empty()) {
      occ.push_back(k);
      continue;
    }
    switch (config.collision) {
      case Collision::overwrite_last:
        occ.front() = k;
        pl.log.push_back({k, c, c, CollisionEvent::Kind::overwritten});
        break;
      case Collision::darkest_wins:
        keep_darkest(occ, k);
        pl.log.push_back({k, c, c, CollisionEvent::Kind::merged});
        break;
      case Collision::strip_split:
        occ.push_back(k);
        pl.log.push_back({k, c, c, CollisionEvent::Kind::stripped});
        break;
      case Collision::cross_adjacent:
      case Collision::spiral_adjacent: {
        bool placed = false;
        for (auto d : order) {
          const GridCell n = step(c, d, config.origin);
          if (!pl.inside(n) || !pl.at(n).empty()) continue;
          pl.at(n).push_back(k);
          pl.log.push_back({k, c, n, CollisionEvent::Kind::displaced});
          placed = true;
          break;
        }
        if (!placed) {
          keep_darkest(occ, k);
          pl.log.push_back({k, c, c, CollisionEvent::Kind::overflow});
          pl.warnings.push_back("pair " + std::to_string(k) + " at " + cell_str(c) +
                                ": all neighbours occupied, kept the darkest pair in the cell");
        }
        break;
      }
    }
  }
  return pl;
}

// ---------------------------------------------------------------------------
// Rendering

std::vector<int> strip_widths(int cell_px, int count) {
  if (count < 1) throw ConfigError("strip count must be >= 1");
  std::vector<int> w(static_cast<std::size_t>(count), cell_px / count);
  for (int i = 0; i < cell_px % count; ++i) ++w[static_cast<std::size_t>(i)];
  return w;
}

std::vector<std::array<std::uint8_t, 3>> random_palette(std::size_t pair_count, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0x52474232));
  std::uniform_int_distribution<int> channel(0, 200);
  std::vector<std::array<std::uint8_t, 3>> out(pair_count);
  for (auto& rgb : out)
    for (auto& v : rgb) v = static_cast<std::uint8_t>(channel(rng));
  return out;
}

PixelRect cell_rect(GridCell c, const EncodingConfig& config) {
  const int s = config.cell_px;
  PixelRect r;
  r.x0 = (c.x - 1) * s;
  r.x1 = c.x * s;
  r.y0 = config.origin == Origin::upper_left ? (c.y - 1) * s : (config.grid - c.y) * s;
  r.y1 = r.y0 + s;
  return r;
}

namespace {

using Color = std::array<std::uint8_t, 3>;

std::vector<Color> pair_colors(std::size_t m, const EncodingConfig& config) {
  const auto schedule = config.resolved_schedule(m);
  std::vector<Color> colors(m);
  switch (config.color) {
    case ColorMode::grayscale:
      for (std::size_t k = 0; k < m; ++k) {
        const auto l = static_cast<std::uint8_t>(schedule.levels[k]);
        colors[k] = {l, l, l};
      }
      break;
    case ColorMode::red_levels:
      for (std::size_t k = 0; k < m; ++k) colors[k] = {static_cast<std::uint8_t>(schedule.levels[k]), 255, 255};
      break;
    case ColorMode::random_rgb:
      colors = random_palette(m, config.rgb_seed);
      break;
  }
  return colors;
}

void fill(Raster& r, int x0, int y0, int x1, int y1, const Color& color) {
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x)
      for (int ch = 0; ch < r.channels; ++ch) r.at(x, y, ch) = color[static_cast<std::size_t>(ch)];
}

}  // namespace

CpcrImage render(const CellPlacement& placement, const EncodingConfig& config) {
  config.validate();
  if (placement.grid != config.grid) throw ConfigError("placement grid does not match config grid");
  const int side = config.image_side();
  const int channels = config.color == ColorMode::grayscale ? 1 : 3;
  CpcrImage img{Raster(side, side, channels), config, 0, 0};
  const auto colors = pair_colors(placement.pair_count, config);

  for (int y = 1; y <= config.grid; ++y) {
    for (int x = 1; x <= config.grid; ++x) {
      const auto& occ = placement.at({x, y});
      if (occ.empty()) continue;
      const auto rect = cell_rect({x, y}, config);
      if (occ.size() == 1) {
        fill(img.raster, rect.x0, rect.y0, rect.x1, rect.y1, colors[occ.front()]);
        continue;
      }
      const auto widths = strip_widths(config.cell_px, static_cast<int>(occ.size()));
      int x0 = rect.x0;
      for (std::size_t i = 0; i < occ.size(); ++i) {
        fill(img.raster, x0, rect.y0, x0 + widths[i], rect.y1, colors[occ[i]]);
        x0 += widths[i];
      }
    }
  }

  if (config.marker == Marker::plus) {
    std::vector<bool> taken(placement.cells.size());
    for (std::size_t i = 0; i < taken.size(); ++i) taken[i] = !placement.cells[i].empty();
    auto index = [&](GridCell c) {
      return static_cast<std::size_t>(c.y - 1) * config.grid + static_cast<std::size_t>(c.x - 1);
    };
    for (std::size_t k = 0; k < placement.pair_count; ++k) {
      const auto home = placement.cell_of(k);
      if (!home) continue;
      for (auto d : {Direction::right, Direction::down, Direction::left, Direction::up}) {
        const GridCell n = step(*home, d, config.origin);
        if (!placement.inside(n) || taken[index(n)]) continue;
        taken[index(n)] = true;
        const auto rect = cell_rect(n, config);
        fill(img.raster, rect.x0, rect.y0, rect.x1, rect.y1, colors[k]);
      }
    }
  }
  return img;
}

CpcrImage encode(const DiscretePoint& point, const Pairing& pairing, const EncodingConfig& config) {
  if (point.grid != 0 && point.grid != config.grid) {
    throw ConfigError("point discretized for grid " + std::to_string(point.grid) + ", config grid is " +
                      std::to_string(config.grid));
  }
  auto img = render(place_pairs(pair_split(point, pairing), config), config);
  img.case_id = point.case_id;
  img.label = point.label;
  return img;
}

std::vector<CpcrImage> encode_all(const DiscreteDataset& data, const Pairing& pairing, const EncodingConfig& config) {
  std::vector<CpcrImage> out;
  out.reserve(data.points.size());
  for (const auto& p : data.points) out.push_back(encode(p, pairing, config));
  return out;
}

// ---------------------------------------------------------------------------
// Decoding

DiscretePoint decode(const CpcrImage& image, const Pairing& pairing, const EncodingConfig& config) {
  using Kind = DecodeError::Kind;
  config.validate();
  const bool adjacent =
      config.collision == Collision::cross_adjacent || config.collision == Collision::spiral_adjacent;
  if (!adjacent && config.collision != Collision::overwrite_last)
    throw DecodeError(Kind::unsupported, "decode supports overwrite, cross and spiral collision strategies only");
  if (config.color != ColorMode::grayscale) throw DecodeError(Kind::unsupported, "decode needs grayscale images");
  if (config.marker != Marker::cell) throw DecodeError(Kind::unsupported, "decode needs cell markers");

  const auto& r = image.raster;
  const int side = config.image_side();
  if (r.width != side || r.height != side)
    throw DecodeError(Kind::malformed, "image is " + std::to_string(r.width) + "x" + std::to_string(r.height) +
                                           ", config implies " + std::to_string(side) + "x" + std::to_string(side));

  const std::size_t m = pairing.pair_count();
  pairing.validate(pairing.order.size());
  const auto schedule = config.resolved_schedule(m);
  std::map<int, std::size_t> pair_of_level;
  for (std::size_t k = 0; k < m; ++k) pair_of_level[schedule.levels[k]] = k;

  std::vector<std::optional<GridCell>> placed(m);
  for (int y = 1; y <= config.grid; ++y) {
    for (int x = 1; x <= config.grid; ++x) {
      const auto rect = cell_rect({x, y}, config);
      const int v = r.at(rect.x0, rect.y0, 0);
      for (int py = rect.y0; py < rect.y1; ++py)
        for (int px = rect.x0; px < rect.x1; ++px)
          for (int ch = 0; ch < r.channels; ++ch)
            if (r.at(px, py, ch) != v)
              throw DecodeError(Kind::malformed, "cell (" + std::to_string(x) + "," + std::to_string(y) +
                                                     ") is not a uniform gray block");
      if (v == kBackground) continue;
      const auto it = pair_of_level.find(v);
      if (it == pair_of_level.end())
        throw DecodeError(Kind::malformed, "intensity " + std::to_string(v) + " is not a schedule level");
      if (placed[it->second])
        throw DecodeError(Kind::malformed, "intensity " + std::to_string(v) + " appears in two cells");
      placed[it->second] = GridCell{x, y};
    }
  }

  std::vector<int> missing;
  for (std::size_t k = 0; k < m; ++k)
    if (!placed[k]) missing.push_back(schedule.levels[k]);
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "missing schedule level(s)";
    for (int l : missing) msg << ' ' << l;
    msg << ": a colliding pair was lost";
    throw DecodeError(Kind::missing_level, msg.str());
  }

  std::vector<GridCell> nominal(m);
  if (!adjacent) {
    for (std::size_t k = 0; k < m; ++k) nominal[k] = *placed[k];
  } else {
    const auto order = fill_order(config);
    // occupant[cell] = earlier pair placed there, in decoding order.
    std::map<GridCell, std::size_t> occupant;
    auto inside = [&](GridCell c) { return c.x >= 1 && c.y >= 1 && c.x <= config.grid && c.y <= config.grid; };
    for (std::size_t k = 0; k < m; ++k) {
      const GridCell c = *placed[k];
      struct Source {
        GridCell cell;
        bool holds_nominal;
      };
      std::vector<Source> sources;
      for (std::size_t j = 0; j < order.size(); ++j) {
        const GridCell n = step(c, opposite(order[j]), config.origin);
        if (!inside(n) || !occupant.contains(n)) continue;
        bool earlier_blocked = true;
        for (std::size_t i = 0; i < j && earlier_blocked; ++i) {
          const GridCell t = step(n, order[i], config.origin);
          earlier_blocked = !inside(t) || occupant.contains(t);
        }
        if (!earlier_blocked) continue;
        const std::size_t held = occupant.at(n);
        sources.push_back({n, nominal[held] == n});
      }
      if (sources.empty()) {
        nominal[k] = c;
      } else {
        // A cell whose own pair was placed there directly is where real
        // collisions pile up; prefer it over cells holding displaced pairs.
        const bool any_nominal = std::any_of(sources.begin(), sources.end(), [](const Source& s) { return s.holds_nominal; });
        std::vector<GridCell> best;
        for (const auto& s : sources)
          if (s.holds_nominal == any_nominal) best.push_back(s.cell);
        if (best.size() > 1) {
          std::ostringstream msg;
          msg << "ambiguous displacement for level " << schedule.levels[k] << ": could come from levels";
          for (const auto& b : best) msg << ' ' << schedule.levels[occupant.at(b)];
          throw DecodeError(Kind::ambiguous, msg.str());
        }
        nominal[k] = best.front();
      }
      occupant.emplace(c, k);
    }
  }

  DiscretePoint p;
  p.values.assign(pairing.order.size(), 0);
  for (std::size_t k = 0; k < m; ++k) {
    p.values[static_cast<std::size_t>(pairing.order[2 * k])] = nominal[k].x;
    p.values[static_cast<std::size_t>(pairing.order[2 * k + 1])] = nominal[k].y;
  }
  p.label = image.label;
  p.grid = config.grid;
  p.case_id = image.case_id;
  return p;
}

// ---------------------------------------------------------------------------
// Names

namespace {

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const std::array<std::pair<const char*, E>, N>& table, const char* what) {
  for (const auto& [name, value] : table)
    if (s == name) return value;
  std::string options;
  for (const auto& [name, value] : table) options += std::string(options.empty() ? "" : ", ") + name;
  throw ConfigError(std::string("unknown ") + what + " '" + s + "' (expected one of: " + options + ")");
}

template <typename E, std::size_t N>
std::string enum_name(E e, const std::array<std::pair<const char*, E>, N>& table) {
  for (const auto& [name, value] : table)
    if (value == e) return name;
  return "?";
}

constexpr std::array<std::pair<const char*, Origin>, 2> kOrigins{{{"ulc", Origin::upper_left},
                                                                  {"llc", Origin::lower_left}}};
constexpr std::array<std::pair<const char*, Collision>, 5> kCollisions{{{"overwrite", Collision::overwrite_last},
                                                                        {"cross", Collision::cross_adjacent},
                                                                        {"spiral", Collision::spiral_adjacent},
                                                                        {"strip", Collision::strip_split},
                                                                        {"darkest", Collision::darkest_wins}}};
constexpr std::array<std::pair<const char*, ColorMode>, 3> kColors{
    {{"gray", ColorMode::grayscale}, {"red", ColorMode::red_levels}, {"rgb", ColorMode::random_rgb}}};
constexpr std::array<std::pair<const char*, Marker>, 2> kMarkers{{{"cell", Marker::cell}, {"plus", Marker::plus}}};
constexpr std::array<std::pair<const char*, Direction>, 8> kDirections{{{"right", Direction::right},
                                                                        {"down", Direction::down},
                                                                        {"left", Direction::left},
                                                                        {"up", Direction::up},
                                                                        {"lower_right", Direction::lower_right},
                                                                        {"lower_left", Direction::lower_left},
                                                                        {"upper_right", Direction::upper_right},
                                                                        {"upper_left", Direction::upper_left}}};

}  // namespace

std::string to_string(Origin o) { return enum_name(o, kOrigins); }
std::string to_string(Collision c) { return enum_name(c, kCollisions); }
std::string to_string(ColorMode c) { return enum_name(c, kColors); }
std::string to_string(Marker m) { return enum_name(m, kMarkers); }
std::string to_string(Direction d) { return enum_name(d, kDirections); }
Origin parse_origin(const std::string& s) { return parse_enum(s, kOrigins, "origin"); }
Collision parse_collision(const std::string& s) { return parse_enum(s, kCollisions, "collision strategy"); }
ColorMode parse_color(const std::string& s) { return parse_enum(s, kColors, "color mode"); }
Marker parse_marker(const std::string& s) { return parse_enum(s, kMarkers, "marker"); }
Direction parse_direction(const std::string& s) { return parse_enum(s, kDirections, "direction"); }

}  // namespace cpcr
