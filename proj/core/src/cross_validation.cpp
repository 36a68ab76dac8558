#include "cpcr/cross_validation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "cpcr/error.hpp"
#include "cpcr/seed.hpp"

namespace cpcr {

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min<std::size_t>(std::max(1u, jobs), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

FoldImages prepare_fold(const DiscreteDataset& data, const std::vector<CpcrImage>& encoded,
                        const ContextOptions& context, const FoldPlan& plan, int fold) {
  if (encoded.size() != data.size() || plan.assignments.size() != data.size())
    throw DataError("fold plan or encodings do not cover the dataset");
  FoldImages f;
  f.fold = fold;
  const auto train_idx = plan.training_indices(fold);
  const auto valid_idx = plan.validation_indices(fold);

  if (context.enabled) {
    std::vector<CpcrImage> train_images;
    train_images.reserve(train_idx.size());
    for (auto i : train_idx) train_images.push_back(encoded[i]);
    f.means = class_means(train_images, data.class_count());
  }
  auto model_input = [&](const CpcrImage& img) {
    return context.enabled ? context_image(img.raster, f.means, context.render) : img.raster;
  };
  for (auto i : train_idx) {
    f.train.push_back(model_input(encoded[i]));
    f.train_labels.push_back(encoded[i].label);
    f.train_ids.push_back(encoded[i].case_id);
  }
  for (auto i : valid_idx) {
    f.validation.push_back(model_input(encoded[i]));
    f.validation_labels.push_back(encoded[i].label);
    f.validation_ids.push_back(encoded[i].case_id);
  }
  return f;
}

MlpModel fold_model(int input_size, int class_count, const TrainConfig& train, int fold) {
  return make_mlp(input_size, class_count, derive_seed(train.seed, 2 * static_cast<std::uint64_t>(fold)));
}

TrainConfig fold_train_config(const TrainConfig& train, int fold) {
  TrainConfig t = train;
  t.seed = derive_seed(train.seed, 2 * static_cast<std::uint64_t>(fold) + 1);
  return t;
}

CvReport cross_validate(const DiscreteDataset& data, const Pairing& pairing, const EncodingConfig& config,
                        const ContextOptions& context, const FoldPlan& plan, const TrainConfig& train,
                        unsigned jobs) {
  const auto started = std::chrono::steady_clock::now();
  if (data.size() == 0) throw DataError("cross-validation: dataset is empty");
  if (plan.k < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (data.class_count() < 1) throw DataError("cross-validation: dataset has no classes");
  train.validate();

  const auto encoded = encode_all(data, pairing, config);

  CvReport r;
  r.folds = plan.k;
  r.stratified = plan.stratified;
  r.fold_seed = plan.seed;
  r.encoding = config;
  r.pairing = pairing;
  r.context = context;
  r.train = train;
  r.fold_accuracies.assign(static_cast<std::size_t>(plan.k), 0.0);
  r.train_sizes.assign(static_cast<std::size_t>(plan.k), 0);
  r.validation_sizes.assign(static_cast<std::size_t>(plan.k), 0);
  std::vector<char> disjoint(static_cast<std::size_t>(plan.k), 1);
  std::vector<char> local(static_cast<std::size_t>(plan.k), 1);

  parallel_for(static_cast<std::size_t>(plan.k), jobs, [&](std::size_t fi) {
    const int fold = static_cast<int>(fi);
    const FoldImages f = prepare_fold(data, encoded, context, plan, fold);
    if (f.train.empty() || f.validation.empty())
      throw DataError("fold " + std::to_string(fold + 1) + " has an empty training or validation part");

    const std::set<std::size_t> train_ids(f.train_ids.begin(), f.train_ids.end());
    for (auto id : f.validation_ids)
      if (train_ids.count(id)) disjoint[fi] = 0;
    for (const auto& m : f.means)
      for (auto id : m.case_ids)
        if (!train_ids.count(id)) local[fi] = 0;

    const Eigen::MatrixXd x_train = stack_inputs(f.train, train.input_divisor);
    const Eigen::MatrixXd x_valid = stack_inputs(f.validation, train.input_divisor);
    MlpModel model = fold_model(static_cast<int>(x_train.cols()), static_cast<int>(data.class_count()), train, fold);
    const TrainResult trained = cpcr::train(std::move(model), x_train, f.train_labels, fold_train_config(train, fold));
    r.fold_accuracies[fi] = accuracy(trained.model, x_valid, f.validation_labels);
    r.train_sizes[fi] = f.train.size();
    r.validation_sizes[fi] = f.validation.size();
  });

  double sum = 0.0;
  for (double a : r.fold_accuracies) sum += a;
  r.mean_accuracy = sum / static_cast<double>(r.fold_accuracies.size());
  r.folds_disjoint = std::all_of(disjoint.begin(), disjoint.end(), [](char c) { return c != 0; });
  r.means_fold_local = std::all_of(local.begin(), local.end(), [](char c) { return c != 0; });
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return r;
}

}  // namespace cpcr
