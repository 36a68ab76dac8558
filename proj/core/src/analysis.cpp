#include "cpcr/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "cpcr/error.hpp"

namespace cpcr {

bool IccCell::contains(GridCell c) const { return std::find(coords.begin(), coords.end(), c) != coords.end(); }

std::vector<IccCell> icc_cells(int grid, int block, Origin origin) {
  if (grid < 1 || block < 1) throw ConfigError("grid and block size must be positive");
  if (grid % block != 0)
    throw ConfigError("block size " + std::to_string(block) + " does not divide grid " + std::to_string(grid));
  const int per_side = grid / block;
  std::vector<IccCell> cells;
  cells.reserve(static_cast<std::size_t>(per_side) * per_side);
  for (int row = 0; row < per_side; ++row) {
    for (int col = 0; col < per_side; ++col) {
      IccCell c;
      c.id = row * per_side + col + 1;
      c.column = col;
      c.row = row;
      // Lowest y value of the block in this origin's convention.
      const int y0 = origin == Origin::lower_left ? row * block + 1 : grid - (row + 1) * block + 1;
      for (int dx = 0; dx < block; ++dx)
        for (int dy = 0; dy < block; ++dy) c.coords.push_back({col * block + 1 + dx, y0 + dy});
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

ImageLayout ImageLayout::context(const EncodingConfig& config, std::size_t class_count) {
  ImageLayout l;
  l.halves = static_cast<int>(class_count);
  const int side = config.image_side();
  l.top = (side * l.halves - side) / 2;
  return l;
}

Raster cover_cell(const Raster& image, const IccCell& cell, const EncodingConfig& config, const ImageLayout& layout) {
  if (image.width != layout.width(config) || image.height != layout.height(config))
    throw DataError("cover: image is " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                    ", configuration expects " + std::to_string(layout.width(config)) + "x" +
                    std::to_string(layout.height(config)));
  Raster out = image;
  const int side = config.image_side();
  for (const GridCell& g : cell.coords) {
    if (g.x < 1 || g.y < 1 || g.x > config.grid || g.y > config.grid)
      throw DataError("cover: cell " + std::to_string(cell.id) + " lies outside the grid");
    const PixelRect r = cell_rect(g, config);
    for (int h = 0; h < layout.halves; ++h)
      for (int y = r.y0; y < r.y1; ++y)
        for (int x = r.x0; x < r.x1; ++x)
          for (int c = 0; c < out.channels; ++c) out.at(h * side + x, layout.top + y, c) = kBackground;
  }
  return out;
}

CpcrImage cover_cell(const CpcrImage& image, const IccCell& cell) {
  CpcrImage out = image;
  out.raster = cover_cell(image.raster, cell, image.config);
  return out;
}

std::vector<int> rank_cells(const std::vector<IccCell>& cells, const std::vector<double>& mean_covered) {
  std::vector<std::size_t> idx(cells.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (mean_covered[a] != mean_covered[b]) return mean_covered[a] < mean_covered[b];
    return cells[a].id < cells[b].id;
  });
  std::vector<int> ids;
  for (auto i : idx) ids.push_back(cells[i].id);
  return ids;
}

IccReport icc_rank(const DiscreteDataset& data, const Pairing& pairing, const EncodingConfig& config,
                   const ContextOptions& context, const FoldPlan& plan, const TrainConfig& train, int block,
                   unsigned jobs) {
  if (data.size() == 0) throw DataError("cell covering: dataset is empty");
  if (plan.k < 2) throw ConfigError("cell covering needs at least 2 folds");
  train.validate();

  IccReport rep;
  rep.block = block;
  rep.cells = icc_cells(config.grid, block, config.origin);
  const auto folds = static_cast<std::size_t>(plan.k);
  rep.covered.assign(rep.cells.size(), std::vector<double>(folds, 0.0));
  rep.baseline_folds.assign(folds, 0.0);
  const ImageLayout layout = context.enabled ? ImageLayout::context(config, data.class_count()) : ImageLayout::single();

  const auto encoded = encode_all(data, pairing, config);
  parallel_for(folds, jobs, [&](std::size_t fi) {
    const int fold = static_cast<int>(fi);
    const FoldImages f = prepare_fold(data, encoded, context, plan, fold);
    const Eigen::MatrixXd x_train = stack_inputs(f.train, train.input_divisor);
    MlpModel model = fold_model(static_cast<int>(x_train.cols()), static_cast<int>(data.class_count()), train, fold);
    const MlpModel trained = cpcr::train(std::move(model), x_train, f.train_labels, fold_train_config(train, fold)).model;

    rep.baseline_folds[fi] = accuracy(trained, stack_inputs(f.validation, train.input_divisor), f.validation_labels);
    for (std::size_t c = 0; c < rep.cells.size(); ++c) {
      std::vector<Raster> masked;
      masked.reserve(f.validation.size());
      for (const auto& img : f.validation) masked.push_back(cover_cell(img, rep.cells[c], config, layout));
      rep.covered[c][fi] = accuracy(trained, stack_inputs(masked, train.input_divisor), f.validation_labels);
    }
  });

  auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); };
  rep.baseline = mean(rep.baseline_folds);
  for (const auto& per_fold : rep.covered) rep.mean_covered.push_back(mean(per_fold));
  rep.ranking = rank_cells(rep.cells, rep.mean_covered);
  rep.most_informative = rep.ranking.front();
  return rep;
}

std::string icc_table(const IccReport& report) {
  std::ostringstream os;
  char line[64];
  std::snprintf(line, sizeof line, "%-6s %9s\n", "Cell", "Accuracy");
  os << line;
  for (int id : report.ranking) {
    const auto it = std::find_if(report.cells.begin(), report.cells.end(), [&](const IccCell& c) { return c.id == id; });
    const double acc = report.mean_covered[static_cast<std::size_t>(it - report.cells.begin())];
    std::snprintf(line, sizeof line, "%-6d %9.2f\n", id, 100.0 * acc);
    os << line;
  }
  std::snprintf(line, sizeof line, "%-6s %9.2f\n", "none", 100.0 * report.baseline);
  os << line;
  return os.str();
}

FrequencyTable pair_frequency(const DiscreteDataset& data, const Pairing& pairing, const IccCell& cell) {
  FrequencyTable t;
  t.cell = cell;
  t.case_count = data.size();
  for (const GridCell& g : cell.coords) {
    if (g.x < 1 || g.y < 1 || g.x > data.grid || g.y > data.grid)
      throw DataError("frequency: cell " + std::to_string(cell.id) + " does not fit grid " + std::to_string(data.grid));
    t.columns.emplace_back(g.x, g.y);
  }
  std::sort(t.columns.begin(), t.columns.end());

  const std::size_t pairs = pairing.pair_count();
  std::vector<FrequencyRow> rows(pairs);
  for (std::size_t k = 0; k < pairs; ++k) {
    rows[k].first = pairing.order[2 * k];
    rows[k].second = pairing.order[2 * k + 1];
    rows[k].counts.assign(t.columns.size(), 0);
  }
  for (const auto& p : data.points) {
    if (p.grid != data.grid) throw DataError("frequency: case " + std::to_string(p.case_id) + " uses another grid");
    const auto split = pair_split(p, pairing);
    for (std::size_t k = 0; k < pairs; ++k) {
      const auto it = std::lower_bound(t.columns.begin(), t.columns.end(), split[k]);
      if (it != t.columns.end() && *it == split[k]) {
        ++rows[k].counts[static_cast<std::size_t>(it - t.columns.begin())];
        ++rows[k].total;
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const FrequencyRow& a, const FrequencyRow& b) { return a.total > b.total; });
  for (auto& r : rows)
    if (r.total > 0) t.rows.push_back(std::move(r));
  return t;
}

std::string frequency_table_text(const FrequencyTable& table) {
  std::ostringstream os;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-12s", "Pair");
  os << buf;
  for (const auto& [vi, vj] : table.columns) {
    std::snprintf(buf, sizeof buf, " %8s", ("(" + std::to_string(vi) + "," + std::to_string(vj) + ")").c_str());
    os << buf;
  }
  os << "    Total\n";
  for (const auto& r : table.rows) {
    const std::string name = "(x" + std::to_string(r.first + 1) + ", x" + std::to_string(r.second + 1) + ")";
    std::snprintf(buf, sizeof buf, "%-12s", name.c_str());
    os << buf;
    for (auto c : r.counts) {
      std::snprintf(buf, sizeof buf, " %8zu", c);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, " %8zu\n", r.total);
    os << buf;
  }
  return os.str();
}

}  // namespace cpcr
