#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "cpcr/context.hpp"
#include "cpcr/data.hpp"
#include "cpcr/encoder.hpp"
#include "cpcr/mlp.hpp"

namespace cpcr {

struct ContextOptions {
  bool enabled = false;
  MeanRender render = MeanRender::own;
  bool operator==(const ContextOptions&) const = default;
};

/// Model-ready images of one fold. With context on, every raster is a padded
/// double image built from means of the training cases only.
struct FoldImages {
  int fold = 0;
  std::vector<Raster> train;
  std::vector<int> train_labels;
  std::vector<std::size_t> train_ids;
  std::vector<Raster> validation;
  std::vector<int> validation_labels;
  std::vector<std::size_t> validation_ids;
  std::vector<MeanImage> means;
};

/// `encoded` must be encode_all(data, ...) in dataset order.
FoldImages prepare_fold(const DiscreteDataset& data, const std::vector<CpcrImage>& encoded,
                        const ContextOptions& context, const FoldPlan& plan, int fold);

/// Seeds for fold f: the model init and training streams are split from
/// the train config seed so folds stay independent of scheduling.
MlpModel fold_model(int input_size, int class_count, const TrainConfig& train, int fold);
TrainConfig fold_train_config(const TrainConfig& train, int fold);

struct CvReport {
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
  std::vector<std::size_t> train_sizes;
  std::vector<std::size_t> validation_sizes;
  int folds = 0;
  bool stratified = false;
  std::uint64_t fold_seed = 0;
  EncodingConfig encoding;
  Pairing pairing;
  ContextOptions context;
  TrainConfig train;
  /// Every fold's training and validation case ids are disjoint.
  bool folds_disjoint = true;
  /// Every class mean was built from training-fold cases only.
  bool means_fold_local = true;
  /// Not serialized, so reports stay reproducible byte for byte.
  double wall_seconds = 0.0;
};

/// Encodes, trains one model per fold and scores the held-out cases.
/// Folds run on up to `jobs` threads; results do not depend on `jobs`.
CvReport cross_validate(const DiscreteDataset& data, const Pairing& pairing, const EncodingConfig& config,
                        const ContextOptions& context, const FoldPlan& plan, const TrainConfig& train,
                        unsigned jobs = 1);

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. The first
/// exception thrown by any task is rethrown after all threads finish.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace cpcr
