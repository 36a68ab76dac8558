#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cpcr {

/// A labeled numeric record. `case_id` is the record's index in its dataset.
struct RawCase {
  std::vector<double> attributes;
  int label = 0;
  std::size_t case_id = 0;
};

/// A labeled table of RawCase with a shared attribute count.
struct Dataset {
  std::string name;
  std::vector<std::string> attribute_names;
  std::vector<std::string> class_names;
  std::vector<RawCase> cases;
  /// Nominal per-attribute (min, max), set by generators whose support is
  /// known in advance. Empty means "compute from the data".
  std::vector<std::pair<double, double>> ranges;

  std::size_t dims() const { return cases.empty() ? attribute_names.size() : cases.front().attributes.size(); }
  std::size_t class_count() const { return class_names.size(); }
  std::size_t size() const { return cases.size(); }
};

/// Integer-grid form of a case. Values lie in [1, grid]; length is even.
struct DiscretePoint {
  std::vector<int> values;
  int label = 0;
  int grid = 0;
  std::size_t case_id = 0;
};

struct DiscreteDataset {
  std::string name;
  int grid = 0;
  std::vector<std::string> class_names;
  std::vector<DiscretePoint> points;

  std::size_t dims() const { return points.empty() ? 0 : points.front().values.size(); }
  std::size_t class_count() const { return class_names.size(); }
  std::size_t size() const { return points.size(); }
};

/// Per-attribute interval edges, grid + 1 strictly increasing reals each.
/// Bin b (1-based) is [edges[b-1], edges[b]); the last bin also includes its
/// upper edge.
class BinningSchema {
 public:
  enum class Rule { edges, uniform };

  /// Uniform bins over each attribute's (min, max). With min == max every
  /// value maps to bin 1.
  static BinningSchema uniform(std::vector<std::pair<double, double>> ranges, int grid, bool clamp = true);
  /// Uniform bins over the dataset's recorded ranges, or its observed
  /// per-attribute min/max when none are recorded.
  static BinningSchema uniform_from(const Dataset& data, int grid, bool clamp = true);
  /// Same uniform [lo, hi) rule for `dims` attributes.
  static BinningSchema range(std::size_t dims, double lo, double hi, int grid, bool clamp = true);
  /// Integer values 1..grid map to themselves (edges at k - 0.5).
  static BinningSchema identity(std::size_t dims, int grid, bool clamp = true);
  /// Explicit edges, one vector of grid + 1 values per attribute.
  static BinningSchema from_edges(std::vector<std::vector<double>> edges, bool clamp = true);

  int grid() const { return grid_; }
  bool clamp() const { return clamp_; }
  std::size_t dims() const { return edges_.size(); }
  Rule rule() const { return rule_; }
  const std::vector<double>& edges(std::size_t attribute) const { return edges_.at(attribute); }

  /// Bin index in [1, grid] for value x of the given attribute.
  int bin(std::size_t attribute, double x) const;
  /// Center of bin b; re-binning it returns b.
  double midpoint(std::size_t attribute, int b) const;

 private:
  Rule rule_ = Rule::edges;
  int grid_ = 0;
  bool clamp_ = true;
  std::vector<std::vector<double>> edges_;
  std::vector<std::pair<double, double>> ranges_;
};

struct CsvOptions {
  char delimiter = ',';
  /// nullopt: detect a header by checking whether the first row parses as data.
  std::optional<bool> has_header;
  /// Column name, or 0-based index; negative indexes count from the end.
  std::variant<std::string, int> label_column = -1;
  std::vector<std::string> missing_tokens = {"", "?", "NA", "NaN", "nan", "null"};
};

/// Parses an RFC-4180 style CSV. Labels are interned to 0-based class
/// indices in first-appearance order. Throws DataError with the 1-based
/// file line number on malformed input.
Dataset load_csv(const std::string& path, const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const CsvOptions& options = {}, const std::string& name = "data");
void write_csv(const Dataset& data, const std::string& path);

/// Maps every attribute to its bin; odd attribute counts are padded by
/// repeating the last value.
DiscreteDataset discretize(const Dataset& data, const BinningSchema& schema);
DiscretePoint discretize(const RawCase& raw, const BinningSchema& schema);

/// Assignment of every case (by position) to one of k folds.
struct FoldPlan {
  int k = 0;
  bool stratified = false;
  std::uint64_t seed = 0;
  std::vector<int> assignments;

  std::vector<std::size_t> training_indices(int fold) const;
  std::vector<std::size_t> validation_indices(int fold) const;
  std::vector<std::size_t> fold_sizes() const;
};

FoldPlan make_folds(const std::vector<int>& labels, int k, bool stratified, std::uint64_t seed);
FoldPlan make_folds(const DiscreteDataset& data, int k, bool stratified, std::uint64_t seed);
FoldPlan make_folds(const Dataset& data, int k, bool stratified, std::uint64_t seed);

/// Parametrization of the Swiss roll generator. The arm parameter t is
/// drawn uniformly from [t_min, t_max].
struct SwissRollOptions {
  int dim = 2;
  int n_per_class = 500;
  double noise = 0.0;
  std::uint64_t seed = 0;
  double t_min = 1.5 * 3.14159265358979323846;
  double t_max = 4.5 * 3.14159265358979323846;
  double height = 21.0;
};

/// Two interleaved spiral arms: class c has points t * (cos(t + c*pi), sin(t + c*pi)),
/// plus Gaussian noise; dim 3 appends a uniform height coordinate.
Dataset gen_swiss_roll(const SwissRollOptions& options);

/// Subset of a dataset keeping the original case ids.
DiscreteDataset subset(const DiscreteDataset& data, const std::vector<std::size_t>& indices);

}  // namespace cpcr
