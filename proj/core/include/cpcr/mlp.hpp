#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpcr/raster.hpp"

namespace cpcr {

/// Fully connected network: rectified-linear hidden layers, softmax output.
/// weights[l] is (widths[l+1] x widths[l]); dropout_after[l] applies to the
/// output of hidden layer l.
struct MlpModel {
  std::vector<int> widths;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::vector<bool> dropout_after;
  double dropout_rate = 0.4;
  std::uint64_t init_seed = 0;

  int input_size() const { return widths.front(); }
  int class_count() const { return widths.back(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;
  bool operator==(const MlpModel& other) const;
};

/// The reference classifier: input -> 64 -> 64 -> 128 -> classes, dropout
/// 0.4 after the second and third hidden layers.
MlpModel make_mlp(int input_size, int class_count, std::uint64_t seed);
/// Arbitrary widths (input, hidden..., output), Glorot-uniform weights,
/// zero biases.
MlpModel make_model(std::vector<int> widths, std::vector<bool> dropout_after, double dropout_rate,
                    std::uint64_t seed);

/// Row-major pixels, channels interleaved, divided by `divisor`.
Eigen::VectorXd image_input(const Raster& r, double divisor = 255.0);
Eigen::MatrixXd stack_inputs(const std::vector<Raster>& images, double divisor = 255.0);

struct ForwardResult {
  Eigen::VectorXd scores;         // pre-softmax class scores S_c
  Eigen::VectorXd probabilities;  // softmax(scores)
};

ForwardResult forward(const MlpModel& model, const Eigen::VectorXd& input, bool training = false,
                      std::uint64_t dropout_seed = 0);
/// Batched inference (dropout off); one row of scores per input row.
Eigen::MatrixXd predict_scores(const MlpModel& model, const Eigen::MatrixXd& inputs);
/// Argmax per row; ties go to the lowest class index.
std::vector<int> predict(const MlpModel& model, const Eigen::MatrixXd& inputs);
double accuracy(const MlpModel& model, const Eigen::MatrixXd& inputs, std::span<const int> labels);

Eigen::VectorXd softmax(const Eigen::VectorXd& scores);

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  double input_divisor = 255.0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochStats> history;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mini-batch gradient descent with momentum on mean cross-entropy.
/// Deterministic given the model and config seeds.
TrainResult train(MlpModel model, const Eigen::MatrixXd& inputs, std::span<const int> labels,
                  const TrainConfig& config);

/// Parameter gradients of the cross-entropy loss for one example (dropout off).
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};
Gradients loss_gradients(const MlpModel& model, const Eigen::VectorXd& input, int label);
double loss(const MlpModel& model, const Eigen::VectorXd& input, int label);

/// Largest |analytic - numeric| / max(|analytic|, |numeric|, 1e-8) over up to
/// `samples` parameters (all of them when 0), using central differences.
double grad_check(const MlpModel& model, const Eigen::VectorXd& input, int label, double epsilon,
                  std::size_t samples = 0, std::uint64_t sample_seed = 0);

struct SaliencyMap {
  int width = 0;
  int height = 0;
  int channels = 1;
  /// dS_c / dI with respect to the model input, same layout as the image.
  Eigen::VectorXd gradient;
  /// |gradient| scaled by its maximum into [0, 1].
  Eigen::VectorXd normalized;

  /// 8-bit heat map (channel maximum of the normalized magnitude).
  Raster to_raster() const;
};

SaliencyMap saliency(const MlpModel& model, const Raster& image, int class_index, double divisor = 255.0);
Eigen::VectorXd score_gradient(const MlpModel& model, const Eigen::VectorXd& input, int class_index);

}  // namespace cpcr
