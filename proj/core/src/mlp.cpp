#include "cpcr/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cpcr/error.hpp"
#include "cpcr/seed.hpp"

namespace cpcr {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Row-major batch of activations: one example per row.
struct BatchTrace {
  std::vector<MatrixXd> z;     // pre-activations per layer
  std::vector<MatrixXd> a;     // a[0] = input, a[l+1] = layer l output (after dropout)
  std::vector<MatrixXd> mask;  // scaled keep masks; empty when not applied
};

void check_input(const MlpModel& model, Eigen::Index cols) {
  if (cols != model.input_size())
    throw DataError("model expects " + std::to_string(model.input_size()) + " inputs, got " +
                    std::to_string(cols));
}

BatchTrace forward_batch(const MlpModel& model, const MatrixXd& x, std::mt19937_64* dropout_rng) {
  const std::size_t layers = model.layer_count();
  BatchTrace t;
  t.z.resize(layers);
  t.a.resize(layers + 1);
  t.mask.resize(layers);
  t.a[0] = x;
  std::bernoulli_distribution keep(1.0 - model.dropout_rate);
  const double scale = 1.0 / (1.0 - model.dropout_rate);
  for (std::size_t l = 0; l < layers; ++l) {
    t.z[l] = (t.a[l] * model.weights[l].transpose()).rowwise() + model.biases[l].transpose();
    if (l + 1 == layers) {
      t.a[l + 1] = t.z[l];
      break;
    }
    MatrixXd h = t.z[l].cwiseMax(0.0);
    if (dropout_rng && model.dropout_after[l]) {
      MatrixXd m(h.rows(), h.cols());
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = keep(*dropout_rng) ? scale : 0.0;
      h = h.cwiseProduct(m);
      t.mask[l] = std::move(m);
    }
    t.a[l + 1] = std::move(h);
  }
  return t;
}

MatrixXd softmax_rows(const MatrixXd& scores) {
  MatrixXd p = scores.colwise() - scores.rowwise().maxCoeff();
  p = p.array().exp();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

// Backpropagates d(objective)/d(scores) through a recorded trace. Fills the
// parameter gradients and returns d(objective)/d(input).
MatrixXd backward_batch(const MlpModel& model, const BatchTrace& t, MatrixXd delta, Gradients* grads) {
  const std::size_t layers = model.layer_count();
  if (grads) {
    grads->weights.resize(layers);
    grads->biases.resize(layers);
  }
  for (std::size_t l = layers; l-- > 0;) {
    if (grads) {
      grads->weights[l] = delta.transpose() * t.a[l];
      grads->biases[l] = delta.colwise().sum().transpose();
    }
    MatrixXd back = delta * model.weights[l];
    if (l == 0) return back;
    const std::size_t prev = l - 1;
    back.array() *= (t.z[prev].array() > 0.0).cast<double>();
    if (t.mask[prev].size() > 0) back.array() *= t.mask[prev].array();
    delta = std::move(back);
  }
  return delta;
}

double cross_entropy(const VectorXd& scores, int label) {
  const double mx = scores.maxCoeff();
  const double lse = mx + std::log((scores.array() - mx).exp().sum());
  return lse - scores(label);
}

void check_label(const MlpModel& model, int label) {
  if (label < 0 || label >= model.class_count())
    throw DataError("label " + std::to_string(label) + " outside 0.." + std::to_string(model.class_count() - 1));
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return n;
}

bool MlpModel::operator==(const MlpModel& o) const {
  if (widths != o.widths || dropout_after != o.dropout_after || dropout_rate != o.dropout_rate ||
      init_seed != o.init_seed)
    return false;
  for (std::size_t l = 0; l < weights.size(); ++l)
    if (weights[l] != o.weights[l] || biases[l] != o.biases[l]) return false;
  return true;
}

MlpModel make_model(std::vector<int> widths, std::vector<bool> dropout_after, double dropout_rate,
                    std::uint64_t seed) {
  if (widths.size() < 2) throw ConfigError("model needs at least an input and an output width");
  for (int w : widths)
    if (w < 1) throw ConfigError("layer widths must be positive");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw ConfigError("dropout rate must be in [0, 1)");
  const std::size_t layers = widths.size() - 1;
  dropout_after.resize(layers, false);
  dropout_after.back() = false;

  MlpModel m;
  m.widths = std::move(widths);
  m.dropout_after = std::move(dropout_after);
  m.dropout_rate = dropout_rate;
  m.init_seed = seed;
  std::mt19937_64 rng(derive_seed(seed, 0));
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = m.widths[l];
    const int out = m.widths[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> u(-limit, limit);
    MatrixXd w(out, in);
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j) w(i, j) = u(rng);
    m.weights.push_back(std::move(w));
    m.biases.push_back(VectorXd::Zero(out));
  }
  return m;
}

MlpModel make_mlp(int input_size, int class_count, std::uint64_t seed) {
  if (class_count < 1) throw ConfigError("class count must be positive");
  return make_model({input_size, 64, 64, 128, class_count}, {false, true, true, false}, 0.4, seed);
}

VectorXd image_input(const Raster& r, double divisor) {
  VectorXd v(static_cast<Eigen::Index>(r.pixels.size()));
  for (std::size_t i = 0; i < r.pixels.size(); ++i) v(static_cast<Eigen::Index>(i)) = r.pixels[i] / divisor;
  return v;
}

MatrixXd stack_inputs(const std::vector<Raster>& images, double divisor) {
  if (images.empty()) return MatrixXd(0, 0);
  const auto cols = static_cast<Eigen::Index>(images.front().pixels.size());
  MatrixXd x(static_cast<Eigen::Index>(images.size()), cols);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& px = images[i].pixels;
    if (static_cast<Eigen::Index>(px.size()) != cols) throw DataError("images differ in size");
    for (Eigen::Index j = 0; j < cols; ++j) x(static_cast<Eigen::Index>(i), j) = px[static_cast<std::size_t>(j)] / divisor;
  }
  return x;
}

VectorXd softmax(const VectorXd& scores) {
  VectorXd p = (scores.array() - scores.maxCoeff()).exp();
  return p / p.sum();
}

ForwardResult forward(const MlpModel& model, const VectorXd& input, bool training, std::uint64_t dropout_seed) {
  check_input(model, input.size());
  std::mt19937_64 rng(dropout_seed);
  const BatchTrace t = forward_batch(model, input.transpose(), training ? &rng : nullptr);
  ForwardResult r;
  r.scores = t.a.back().row(0).transpose();
  r.probabilities = softmax(r.scores);
  return r;
}

MatrixXd predict_scores(const MlpModel& model, const MatrixXd& inputs) {
  if (inputs.rows() == 0) return MatrixXd(0, model.class_count());
  check_input(model, inputs.cols());
  return forward_batch(model, inputs, nullptr).a.back();
}

std::vector<int> predict(const MlpModel& model, const MatrixXd& inputs) {
  const MatrixXd s = predict_scores(model, inputs);
  std::vector<int> out(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < s.cols(); ++c)
      if (s(i, c) > s(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double accuracy(const MlpModel& model, const MatrixXd& inputs, std::span<const int> labels) {
  if (static_cast<std::size_t>(inputs.rows()) != labels.size())
    throw DataError("accuracy: input and label counts differ");
  if (labels.empty()) return 0.0;
  const auto pred = predict(model, inputs);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
  if (!(input_divisor > 0.0)) throw ConfigError("input divisor must be positive");
}

TrainResult train(MlpModel model, const MatrixXd& inputs, std::span<const int> labels, const TrainConfig& config) {
  if (inputs.rows() == 0) throw DataError("training set is empty");
  if (static_cast<std::size_t>(inputs.rows()) != labels.size())
    throw DataError("training inputs and labels differ in count");
  check_input(model, inputs.cols());
  for (int y : labels) check_label(model, y);

  TrainResult result;
  if (config.epochs == 0) {
    result.model = std::move(model);
    return result;
  }
  config.validate();

  const std::size_t layers = model.layer_count();
  std::vector<MatrixXd> vw(layers);
  std::vector<VectorXd> vb(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    vw[l] = MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
    vb[l] = VectorXd::Zero(model.biases[l].size());
  }

  const auto n = static_cast<std::size_t>(inputs.rows());
  const auto classes = model.class_count();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, 1));
  std::mt19937_64 dropout_rng(derive_seed(config.seed, 2));
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0, b = 0; start < n; start += batch, ++b) {
      const std::size_t len = std::min(batch, n - start);
      MatrixXd x(static_cast<Eigen::Index>(len), inputs.cols());
      for (std::size_t i = 0; i < len; ++i) x.row(static_cast<Eigen::Index>(i)) = inputs.row(static_cast<Eigen::Index>(order[start + i]));

      const BatchTrace t = forward_batch(model, x, &dropout_rng);
      const MatrixXd& s = t.a.back();
      MatrixXd delta = softmax_rows(s);
      double batch_loss = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const int y = labels[order[start + i]];
        batch_loss += cross_entropy(s.row(r).transpose(), y);
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < classes; ++c)
          if (s(r, c) > s(r, best)) best = c;
        correct += best == y;
        delta(r, y) -= 1.0;
      }
      if (!std::isfinite(batch_loss))
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                            std::to_string(b + 1));
      loss_sum += batch_loss;
      delta /= static_cast<double>(len);

      Gradients g;
      backward_batch(model, t, std::move(delta), &g);
      for (std::size_t l = 0; l < layers; ++l) {
        vw[l] = config.momentum * vw[l] - config.learning_rate * g.weights[l];
        vb[l] = config.momentum * vb[l] - config.learning_rate * g.biases[l];
        model.weights[l] += vw[l];
        model.biases[l] += vb[l];
      }
    }
    result.history.push_back({loss_sum / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n)});
  }
  result.model = std::move(model);
  return result;
}

Gradients loss_gradients(const MlpModel& model, const VectorXd& input, int label) {
  check_input(model, input.size());
  check_label(model, label);
  const BatchTrace t = forward_batch(model, input.transpose(), nullptr);
  MatrixXd delta = softmax_rows(t.a.back());
  delta(0, label) -= 1.0;
  Gradients g;
  backward_batch(model, t, std::move(delta), &g);
  return g;
}

double loss(const MlpModel& model, const VectorXd& input, int label) {
  check_label(model, label);
  return cross_entropy(forward(model, input).scores, label);
}

double grad_check(const MlpModel& model, const VectorXd& input, int label, double epsilon, std::size_t samples,
                  std::uint64_t sample_seed) {
  const Gradients g = loss_gradients(model, input, label);

  // Flat parameter index: per layer, weights (column-major) then biases.
  struct Slot {
    std::size_t layer;
    bool bias;
    Eigen::Index index;
  };
  std::vector<Slot> slots;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    for (Eigen::Index i = 0; i < model.weights[l].size(); ++i) slots.push_back({l, false, i});
    for (Eigen::Index i = 0; i < model.biases[l].size(); ++i) slots.push_back({l, true, i});
  }
  if (samples > 0 && samples < slots.size()) {
    std::vector<Slot> picked;
    std::mt19937_64 rng(derive_seed(sample_seed, 3));
    std::sample(slots.begin(), slots.end(), std::back_inserter(picked), samples, rng);
    slots = std::move(picked);
  }

  MlpModel probe = model;
  double worst = 0.0;
  for (const Slot& s : slots) {
    double& p = s.bias ? probe.biases[s.layer](s.index) : probe.weights[s.layer].data()[s.index];
    const double analytic = s.bias ? g.biases[s.layer](s.index) : g.weights[s.layer].data()[s.index];
    const double saved = p;
    p = saved + epsilon;
    const double up = loss(probe, input, label);
    p = saved - epsilon;
    const double down = loss(probe, input, label);
    p = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

VectorXd score_gradient(const MlpModel& model, const VectorXd& input, int class_index) {
  check_input(model, input.size());
  check_label(model, class_index);
  const BatchTrace t = forward_batch(model, input.transpose(), nullptr);
  MatrixXd delta = MatrixXd::Zero(1, model.class_count());
  delta(0, class_index) = 1.0;
  return backward_batch(model, t, std::move(delta), nullptr).row(0).transpose();
}

SaliencyMap saliency(const MlpModel& model, const Raster& image, int class_index, double divisor) {
  SaliencyMap m;
  m.width = image.width;
  m.height = image.height;
  m.channels = image.channels;
  m.gradient = score_gradient(model, image_input(image, divisor), class_index);
  m.normalized = m.gradient.cwiseAbs();
  const double mx = m.normalized.size() ? m.normalized.maxCoeff() : 0.0;
  if (mx > 0.0) m.normalized /= mx;
  return m;
}

Raster SaliencyMap::to_raster() const {
  Raster r(width, height, 1);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double v = 0.0;
      for (int c = 0; c < channels; ++c)
        v = std::max(v, normalized((static_cast<Eigen::Index>(y) * width + x) * channels + c));
      r.at(x, y) = static_cast<std::uint8_t>(std::lround(255.0 * v));
    }
  }
  return r;
}

}  // namespace cpcr
