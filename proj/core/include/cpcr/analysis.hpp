#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cpcr/cross_validation.hpp"
#include "cpcr/data.hpp"
#include "cpcr/encoder.hpp"
#include "cpcr/mlp.hpp"

namespace cpcr {

/// One block of the coarse covering grid. Ids run left to right, then
/// bottom to top on the rendered image.
struct IccCell {
  int id = 0;
  int column = 0;  // 0-based, from the left
  int row = 0;     // 0-based, from the bottom
  std::vector<GridCell> coords;

  bool contains(GridCell c) const;
};

/// (grid/block)^2 cells. Coordinates are expressed in `origin`'s convention,
/// so Cell 1 is x,y in {1,2} under lower_left and x in {1,2}, y in {9,10}
/// under upper_left (grid 10, block 2).
std::vector<IccCell> icc_cells(int grid, int block, Origin origin = Origin::lower_left);

/// Where grid cells land in a model input: a plain image, or a padded double
/// image with one copy of the grid per class mean.
struct ImageLayout {
  int halves = 1;
  int top = 0;

  static ImageLayout single() { return {}; }
  static ImageLayout context(const EncodingConfig& config, std::size_t class_count);
  int width(const EncodingConfig& config) const { return config.image_side() * halves; }
  int height(const EncodingConfig& config) const { return halves == 1 ? config.image_side() : width(config); }
};

/// Whitens the cell's pixel blocks (in every half of a double image).
Raster cover_cell(const Raster& image, const IccCell& cell, const EncodingConfig& config,
                  const ImageLayout& layout = ImageLayout::single());
CpcrImage cover_cell(const CpcrImage& image, const IccCell& cell);

struct IccReport {
  std::vector<IccCell> cells;
  /// covered[i][f]: accuracy on fold f with cells[i] covered.
  std::vector<std::vector<double>> covered;
  std::vector<double> mean_covered;
  std::vector<double> baseline_folds;
  double baseline = 0.0;
  /// Cell ids by ascending mean covered accuracy, lower id first on ties.
  std::vector<int> ranking;
  int most_informative = 0;
  int block = 2;
};

/// Trains one model per fold on uncovered images, then scores the
/// validation images once uncovered and once per covered cell.
IccReport icc_rank(const DiscreteDataset& data, const Pairing& pairing, const EncodingConfig& config,
                   const ContextOptions& context, const FoldPlan& plan, const TrainConfig& train, int block = 2,
                   unsigned jobs = 1);

/// Orders cells by mean accuracy ascending, ties to the lower id.
std::vector<int> rank_cells(const std::vector<IccCell>& cells, const std::vector<double>& mean_covered);
std::string icc_table(const IccReport& report);

struct FrequencyRow {
  int first = 0;   // 0-based attribute index
  int second = 0;  // 0-based attribute index
  std::vector<std::size_t> counts;  // per FrequencyTable::columns
  std::size_t total = 0;
};

/// How often each attribute pair's nominal (pre-collision) cell falls in one
/// covering cell. Rows with a zero total are omitted; rows are sorted by
/// total descending, earlier pairs first on ties.
struct FrequencyTable {
  IccCell cell;
  std::vector<ValuePair> columns;
  std::vector<FrequencyRow> rows;
  std::size_t case_count = 0;
};

FrequencyTable pair_frequency(const DiscreteDataset& data, const Pairing& pairing, const IccCell& cell);
std::string frequency_table_text(const FrequencyTable& table);

}  // namespace cpcr
