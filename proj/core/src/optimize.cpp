#include "cpcr/optimize.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>
#include <set>

#include "cpcr/error.hpp"
#include "cpcr/seed.hpp"

namespace cpcr {

void SearchSpec::validate() const {
  if (k < 0) throw ConfigError("search size must not be negative");
  if (inner_folds < 2) throw ConfigError("inner cross-validation needs at least 2 folds");
  train.validate();
}

Pairing sample_pairing(std::size_t n, std::mt19937_64& rng) {
  if (n == 0 || n % 2 != 0) throw ConfigError("pairing needs an even, positive attribute count (pad first)");
  Pairing p;
  p.order.resize(n);
  std::iota(p.order.begin(), p.order.end(), 0);
  std::shuffle(p.order.begin(), p.order.end(), rng);
  return p;
}

IntensitySchedule sample_schedule(int m, std::mt19937_64& rng) {
  if (m < 1 || m > 254) throw ConfigError("schedule size must be in 1..254");
  // Level 254 is left out so that m = 254 forces the full pool 0..253.
  std::vector<int> pool(254);
  std::iota(pool.begin(), pool.end(), 0);
  IntensitySchedule s;
  std::sample(pool.begin(), pool.end(), std::back_inserter(s.levels), m, rng);
  std::sort(s.levels.begin(), s.levels.end());
  return s;
}

SearchTrace random_search(const DiscreteDataset& training, const SearchSpec& spec,
                          const EncodingConfig& config_template, unsigned jobs) {
  spec.validate();
  if (training.size() == 0) throw DataError("random search: training set is empty");
  const std::size_t n = training.dims();
  const int m = static_cast<int>(n / 2);

  SearchTrace trace;
  trace.candidates.resize(static_cast<std::size_t>(spec.k) + 1);
  trace.candidates[0].pairing = Pairing::identity(n);
  trace.candidates[0].schedule = default_schedule(m);
  for (int i = 1; i <= spec.k; ++i) {
    std::mt19937_64 rng(derive_seed(spec.seed, 1000 + static_cast<std::uint64_t>(i)));
    auto& c = trace.candidates[static_cast<std::size_t>(i)];
    const bool pairs = spec.target != SearchTarget::intensities;
    const bool levels = spec.target != SearchTarget::pairing;
    c.pairing = pairs ? sample_pairing(n, rng) : Pairing::identity(n);
    c.schedule = levels ? sample_schedule(m, rng) : default_schedule(m);
  }

  const FoldPlan inner = make_folds(training, spec.inner_folds, spec.stratified, derive_seed(spec.seed, 7));
  // Candidates run one after another; the folds inside each use the threads.
  for (auto& c : trace.candidates) {
    EncodingConfig cfg = config_template;
    cfg.schedule = c.schedule;
    const CvReport r = cross_validate(training, c.pairing, cfg, spec.context, inner, spec.train, jobs);
    c.fold_accuracies = r.fold_accuracies;
    c.accuracy = r.mean_accuracy;
  }
  for (std::size_t i = 1; i < trace.candidates.size(); ++i)
    if (trace.candidates[i].accuracy > trace.candidates[trace.best].accuracy) trace.best = i;
  return trace;
}

void check_no_leakage(const DiscreteDataset& training, const DiscreteDataset& full, const FoldPlan& outer, int fold) {
  std::set<std::size_t> held_out;
  for (auto i : outer.validation_indices(fold)) held_out.insert(full.points.at(i).case_id);
  for (const auto& p : training.points)
    if (held_out.count(p.case_id))
      throw DataError("case " + std::to_string(p.case_id) + " of validation fold " + std::to_string(fold + 1) +
                      " reached the search");
}

EncodingConfig best_config(const EncodingConfig& config_template, const SearchTrace& trace) {
  EncodingConfig cfg = config_template;
  cfg.schedule = trace.best_candidate().schedule;
  return cfg;
}

std::string to_string(SearchTarget t) {
  switch (t) {
    case SearchTarget::pairing: return "pairing";
    case SearchTarget::intensities: return "intensities";
    case SearchTarget::both: return "both";
  }
  return "pairing";
}

SearchTarget parse_search_target(const std::string& s) {
  if (s == "pairing") return SearchTarget::pairing;
  if (s == "intensities") return SearchTarget::intensities;
  if (s == "both") return SearchTarget::both;
  throw ConfigError("unknown search target '" + s + "' (expected pairing, intensities or both)");
}

}  // namespace cpcr
