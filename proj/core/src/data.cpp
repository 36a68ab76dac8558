#include "cpcr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "cpcr/error.hpp"
#include "cpcr/seed.hpp"

namespace cpcr {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

// RFC-4180 tokenizer: quoted fields may contain delimiters, doubled quotes
// and line breaks.
std::vector<CsvRecord> tokenize(const std::string& text, char delimiter) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(field_quoted ? field : trim(field));
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = current.fields.size() == 1 && current.fields.front().empty();
    if (!blank) records.push_back(std::move(current));
    current = CsvRecord{};
    current.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && trim(field).empty()) {
      field.clear();
      in_quotes = true;
      field_quoted = true;
    } else if (c == delimiter) {
      end_field();
    } else if (c == '\n') {
      ++line;
      end_record();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (in_quotes) throw DataError("line " + std::to_string(current.line) + ": unterminated quoted field");
  if (!field.empty() || !current.fields.empty()) end_record();
  return records;
}

}  // namespace

// ---------------------------------------------------------------------------
// BinningSchema

BinningSchema BinningSchema::uniform(std::vector<std::pair<double, double>> ranges, int grid, bool clamp) {
  if (grid < 2) throw ConfigError("binning: grid must be >= 2");
  if (ranges.empty()) throw ConfigError("binning: no attributes");
  BinningSchema s;
  s.rule_ = Rule::uniform;
  s.grid_ = grid;
  s.clamp_ = clamp;
  for (const auto& [lo, hi] : ranges) {
    if (!(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("binning: invalid attribute range");
    std::vector<double> e(static_cast<std::size_t>(grid) + 1);
    const double width = (hi - lo) / grid;
    for (int k = 0; k <= grid; ++k) e[static_cast<std::size_t>(k)] = lo + width * k;
    s.edges_.push_back(std::move(e));
  }
  s.ranges_ = std::move(ranges);
  return s;
}

BinningSchema BinningSchema::uniform_from(const Dataset& data, int grid, bool clamp) {
  if (!data.ranges.empty()) return uniform(data.ranges, grid, clamp);
  if (data.cases.empty()) throw DataError("binning: empty dataset");
  const std::size_t n = data.dims();
  std::vector<std::pair<double, double>> ranges(n, {std::numeric_limits<double>::infinity(),
                                                    -std::numeric_limits<double>::infinity()});
  for (const auto& c : data.cases) {
    for (std::size_t a = 0; a < n; ++a) {
      ranges[a].first = std::min(ranges[a].first, c.attributes[a]);
      ranges[a].second = std::max(ranges[a].second, c.attributes[a]);
    }
  }
  return uniform(std::move(ranges), grid, clamp);
}

BinningSchema BinningSchema::range(std::size_t dims, double lo, double hi, int grid, bool clamp) {
  if (!(hi > lo)) throw ConfigError("binning: range requires lo < hi");
  return uniform(std::vector<std::pair<double, double>>(dims, {lo, hi}), grid, clamp);
}

BinningSchema BinningSchema::identity(std::size_t dims, int grid, bool clamp) {
  std::vector<double> e(static_cast<std::size_t>(grid) + 1);
  for (int k = 0; k <= grid; ++k) e[static_cast<std::size_t>(k)] = k + 0.5;
  return from_edges(std::vector<std::vector<double>>(dims, e), clamp);
}

BinningSchema BinningSchema::from_edges(std::vector<std::vector<double>> edges, bool clamp) {
  if (edges.empty()) throw ConfigError("binning: no attributes");
  const std::size_t count = edges.front().size();
  if (count < 3) throw ConfigError("binning: grid must be >= 2");
  for (const auto& e : edges) {
    if (e.size() != count) throw ConfigError("binning: every attribute needs the same number of bins");
    if (std::adjacent_find(e.begin(), e.end(), std::greater_equal<>()) != e.end())
      throw ConfigError("binning: edges must be strictly increasing");
  }
  BinningSchema s;
  s.rule_ = Rule::edges;
  s.grid_ = static_cast<int>(count) - 1;
  s.clamp_ = clamp;
  s.edges_ = std::move(edges);
  return s;
}

int BinningSchema::bin(std::size_t attribute, double x) const {
  if (attribute >= edges_.size()) throw ConfigError("binning: attribute index out of schema");
  const auto& e = edges_[attribute];
  const double lo = rule_ == Rule::uniform ? ranges_[attribute].first : e.front();
  const double hi = rule_ == Rule::uniform ? ranges_[attribute].second : e.back();
  if (x < lo || x > hi) {
    if (!clamp_) {
      std::ostringstream msg;
      msg << "value " << x << " of attribute " << attribute << " outside [" << lo << ", " << hi << "]";
      throw DataError(msg.str());
    }
    return x < lo ? 1 : grid_;
  }
  if (rule_ == Rule::uniform) {
    const double width = (ranges_[attribute].second - ranges_[attribute].first) / grid_;
    if (width <= 0.0) return 1;
    const auto b = static_cast<long long>(std::floor((x - ranges_[attribute].first) / width)) + 1;
    return static_cast<int>(std::clamp<long long>(b, 1, grid_));
  }
  const auto b = std::upper_bound(e.begin(), e.end(), x) - e.begin();
  return static_cast<int>(std::clamp<long long>(b, 1, grid_));
}

double BinningSchema::midpoint(std::size_t attribute, int b) const {
  if (b < 1 || b > grid_) throw ConfigError("binning: bin index out of range");
  const auto& e = edges_.at(attribute);
  if (rule_ == Rule::uniform) {
    const auto [lo, hi] = ranges_[attribute];
    return lo + (b - 0.5) * ((hi - lo) / grid_);
  }
  return 0.5 * (e[static_cast<std::size_t>(b) - 1] + e[static_cast<std::size_t>(b)]);
}

// ---------------------------------------------------------------------------
// CSV

Dataset parse_csv(const std::string& text, const CsvOptions& options, const std::string& name) {
  auto records = tokenize(text, options.delimiter);
  if (records.empty()) throw DataError(name + ": no rows");

  const std::size_t columns = records.front().fields.size();
  if (columns < 2) throw DataError(name + ": need at least one attribute and a label column");
  for (const auto& r : records) {
    if (r.fields.size() != columns) {
      throw DataError(name + ": line " + std::to_string(r.line) + ": expected " + std::to_string(columns) +
                      " fields, found " + std::to_string(r.fields.size()));
    }
  }

  std::size_t label_col = columns;
  bool header = false;
  if (options.has_header) {
    header = *options.has_header;
  } else if (std::holds_alternative<std::string>(options.label_column)) {
    header = true;
  } else {
    // Header when any field other than the label is non-numeric and not a missing token.
    const int idx = std::get<int>(options.label_column);
    const std::size_t lc = idx < 0 ? columns - static_cast<std::size_t>(-idx) : static_cast<std::size_t>(idx);
    for (std::size_t c = 0; c < columns; ++c) {
      if (c == lc) continue;
      const auto& f = records.front().fields[c];
      const bool missing = std::find(options.missing_tokens.begin(), options.missing_tokens.end(), f) !=
                           options.missing_tokens.end();
      if (!missing && !parse_number(f)) header = true;
    }
  }

  std::vector<std::string> names;
  if (header) {
    names = records.front().fields;
  } else {
    for (std::size_t c = 0; c < columns; ++c) names.push_back("x" + std::to_string(c + 1));
  }

  if (const auto* col_name = std::get_if<std::string>(&options.label_column)) {
    if (!header) throw DataError(name + ": label column given by name but the file has no header");
    const auto it = std::find(names.begin(), names.end(), *col_name);
    if (it == names.end()) throw DataError(name + ": missing label column '" + *col_name + "'");
    label_col = static_cast<std::size_t>(it - names.begin());
  } else {
    const int idx = std::get<int>(options.label_column);
    const long long resolved = idx < 0 ? static_cast<long long>(columns) + idx : idx;
    if (resolved < 0 || resolved >= static_cast<long long>(columns))
      throw DataError(name + ": missing label column index " + std::to_string(idx));
    label_col = static_cast<std::size_t>(resolved);
  }

  Dataset data;
  data.name = name;
  for (std::size_t c = 0; c < columns; ++c)
    if (c != label_col) data.attribute_names.push_back(names[c]);

  std::map<std::string, int> classes;
  for (std::size_t r = header ? 1 : 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    RawCase rc;
    rc.case_id = data.cases.size();
    rc.attributes.reserve(columns - 1);
    for (std::size_t c = 0; c < columns; ++c) {
      const auto& f = rec.fields[c];
      const bool missing = std::find(options.missing_tokens.begin(), options.missing_tokens.end(), f) !=
                           options.missing_tokens.end();
      if (c == label_col) {
        if (missing) throw DataError(name + ": line " + std::to_string(rec.line) + ": missing label");
        auto [it, inserted] = classes.try_emplace(f, static_cast<int>(data.class_names.size()));
        if (inserted) data.class_names.push_back(f);
        rc.label = it->second;
        continue;
      }
      if (missing) {
        throw DataError(name + ": line " + std::to_string(rec.line) + ": missing value in column '" + names[c] +
                        "' (incomplete records are not supported)");
      }
      const auto v = parse_number(f);
      if (!v) {
        throw DataError(name + ": line " + std::to_string(rec.line) + ": non-numeric value '" + f +
                        "' in column '" + names[c] + "'");
      }
      rc.attributes.push_back(*v);
    }
    data.cases.push_back(std::move(rc));
  }
  if (data.cases.empty()) throw DataError(name + ": no data rows");
  return data;
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), options, std::filesystem::path(path).stem().string());
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.precision(17);
  for (const auto& n : data.attribute_names) out << n << ',';
  out << "class\n";
  for (const auto& c : data.cases) {
    for (double v : c.attributes) out << v << ',';
    out << data.class_names.at(static_cast<std::size_t>(c.label)) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Discretization

DiscretePoint discretize(const RawCase& raw, const BinningSchema& schema) {
  if (raw.attributes.size() != schema.dims()) {
    throw DataError("case " + std::to_string(raw.case_id) + ": " + std::to_string(raw.attributes.size()) +
                    " attributes, binning schema covers " + std::to_string(schema.dims()));
  }
  DiscretePoint p;
  p.label = raw.label;
  p.grid = schema.grid();
  p.case_id = raw.case_id;
  p.values.reserve(raw.attributes.size() + 1);
  for (std::size_t a = 0; a < raw.attributes.size(); ++a) p.values.push_back(schema.bin(a, raw.attributes[a]));
  if (p.values.size() % 2 == 1) p.values.push_back(p.values.back());
  return p;
}

DiscreteDataset discretize(const Dataset& data, const BinningSchema& schema) {
  DiscreteDataset out;
  out.name = data.name;
  out.grid = schema.grid();
  out.class_names = data.class_names;
  out.points.reserve(data.cases.size());
  for (const auto& c : data.cases) out.points.push_back(discretize(c, schema));
  return out;
}

DiscreteDataset subset(const DiscreteDataset& data, const std::vector<std::size_t>& indices) {
  DiscreteDataset out;
  out.name = data.name;
  out.grid = data.grid;
  out.class_names = data.class_names;
  out.points.reserve(indices.size());
  for (auto i : indices) out.points.push_back(data.points.at(i));
  return out;
}

// ---------------------------------------------------------------------------
// Folds

std::vector<std::size_t> FoldPlan::training_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::validation_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int f : assignments) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

FoldPlan make_folds(const std::vector<int>& labels, int k, bool stratified, std::uint64_t seed) {
  if (k < 2) throw ConfigError("folds: k must be >= 2");
  if (labels.size() < static_cast<std::size_t>(k)) throw DataError("folds: fewer cases than folds");

  std::mt19937_64 rng(derive_seed(seed, 0));
  std::vector<std::size_t> order;
  if (stratified) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    for (auto& [label, members] : by_class) {
      if (members.size() < static_cast<std::size_t>(k)) {
        throw DataError("folds: class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                        " cases, fewer than k=" + std::to_string(k) + " for a stratified split");
      }
      std::shuffle(members.begin(), members.end(), rng);
      order.insert(order.end(), members.begin(), members.end());
    }
  } else {
    order.resize(labels.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
  }

  // Dealing the (class-grouped) order round-robin keeps both the fold sizes
  // and the per-class counts within one of each other.
  FoldPlan plan;
  plan.k = k;
  plan.stratified = stratified;
  plan.seed = seed;
  plan.assignments.assign(labels.size(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) plan.assignments[order[pos]] = static_cast<int>(pos % k);
  return plan;
}

FoldPlan make_folds(const DiscreteDataset& data, int k, bool stratified, std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(data.points.size());
  for (const auto& p : data.points) labels.push_back(p.label);
  return make_folds(labels, k, stratified, seed);
}

FoldPlan make_folds(const Dataset& data, int k, bool stratified, std::uint64_t seed) {
  std::vector<int> labels;
  labels.reserve(data.cases.size());
  for (const auto& c : data.cases) labels.push_back(c.label);
  return make_folds(labels, k, stratified, seed);
}

// ---------------------------------------------------------------------------
// Swiss roll

Dataset gen_swiss_roll(const SwissRollOptions& o) {
  if (o.dim != 2 && o.dim != 3) throw ConfigError("swiss roll: dim must be 2 or 3");
  if (o.n_per_class < 1) throw ConfigError("swiss roll: n_per_class must be >= 1");
  if (o.noise < 0.0) throw ConfigError("swiss roll: noise must be >= 0");
  if (!(o.t_max >= o.t_min) || o.t_min < 0.0) throw ConfigError("swiss roll: invalid t range");

  std::mt19937_64 rng(derive_seed(o.seed, 1));
  std::uniform_real_distribution<double> t_dist(o.t_min, o.t_max);
  std::uniform_real_distribution<double> h_dist(0.0, o.height);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset d;
  d.name = o.dim == 2 ? "swiss_roll_2d" : "swiss_roll_3d";
  d.attribute_names = {"x1", "x2"};
  if (o.dim == 3) d.attribute_names.push_back("x3");
  d.class_names = {"0", "1"};
  const double reach = o.t_max + 4.0 * o.noise;
  d.ranges = {{-reach, reach}, {-reach, reach}};
  if (o.dim == 3) d.ranges.emplace_back(0.0, o.height);

  // Interleaved so a prefix of the dataset stays class-balanced.
  for (int i = 0; i < o.n_per_class; ++i) {
    for (int c = 0; c < 2; ++c) {
      const double t = t_dist(rng);
      const double phase = t + c * std::numbers::pi;
      RawCase rc;
      rc.label = c;
      rc.case_id = d.cases.size();
      double x1 = t * std::cos(phase);
      double x2 = t * std::sin(phase);
      if (o.noise > 0.0) {
        x1 += o.noise * noise(rng);
        x2 += o.noise * noise(rng);
      }
      rc.attributes = {x1, x2};
      if (o.dim == 3) rc.attributes.push_back(h_dist(rng));
      d.cases.push_back(std::move(rc));
    }
  }
  return d;
}

}  // namespace cpcr
