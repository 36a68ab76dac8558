#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cpcr/cross_validation.hpp"
#include "cpcr/data.hpp"
#include "cpcr/encoder.hpp"
#include "cpcr/mlp.hpp"

namespace cpcr {

enum class SearchTarget { pairing, intensities, both };

struct SearchSpec {
  int k = 30;
  std::uint64_t seed = 0;
  SearchTarget target = SearchTarget::pairing;
  int inner_folds = 3;
  bool stratified = true;
  TrainConfig train;
  ContextOptions context;

  void validate() const;
  bool operator==(const SearchSpec&) const = default;
};

struct SearchCandidate {
  Pairing pairing;
  IntensitySchedule schedule;
  std::vector<double> fold_accuracies;
  double accuracy = 0.0;
};

/// candidates[0] is the baseline (identity pairing, default schedule).
struct SearchTrace {
  std::vector<SearchCandidate> candidates;
  std::size_t best = 0;

  const SearchCandidate& best_candidate() const { return candidates.at(best); }
};

/// Uniform random permutation of 0..n-1; n must be even.
Pairing sample_pairing(std::size_t n, std::mt19937_64& rng);
/// m distinct levels from [0, 253], ascending.
IntensitySchedule sample_schedule(int m, std::mt19937_64& rng);

/// Scores the baseline and spec.k random candidates by inner cross-validation
/// on `training` alone. Every candidate sees the same inner folds and seeds.
/// The best is the highest accuracy, earliest on ties.
SearchTrace random_search(const DiscreteDataset& training, const SearchSpec& spec,
                          const EncodingConfig& config_template, unsigned jobs = 1);

/// Throws DataError if any case of `training` belongs to validation fold
/// `fold` of `outer` over `full`.
void check_no_leakage(const DiscreteDataset& training, const DiscreteDataset& full, const FoldPlan& outer, int fold);

/// The template with the best candidate's schedule filled in.
EncodingConfig best_config(const EncodingConfig& config_template, const SearchTrace& trace);

std::string to_string(SearchTarget t);
SearchTarget parse_search_target(const std::string& s);

}  // namespace cpcr
