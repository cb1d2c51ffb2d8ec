#pragma once

// Small fully connected classifier: z = W x + b per layer, ReLU (or
// logistic) hidden activations, softmax output, cross-entropy loss trained
// with mini-batch gradient descent.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string_view>
#include <vector>

#include "rssiloc/error.hpp"
#include "rssiloc/learners/dataset.hpp"
#include "rssiloc/rng.hpp"

namespace rssiloc {

enum class Activation { Relu, Sigmoid };

constexpr std::string_view to_string(Activation a) { return a == Activation::Relu ? "relu" : "sigmoid"; }

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out

  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.weights.rows() == b.weights.rows() && a.weights.cols() == b.weights.cols() && a.weights == b.weights &&
           a.bias.size() == b.bias.size() && a.bias == b.bias;
  }
};

struct MlpModel {
  std::vector<DenseLayer> layers;
  Activation hidden = Activation::Relu;
  // x' = (x - input_offset) / input_scale, applied before the first layer
  Eigen::VectorXd input_offset;
  Eigen::VectorXd input_scale;

  std::size_t input_size() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weights.cols()); }
  std::size_t output_size() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weights.rows()); }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s;
    if (layers.empty()) return s;
    s.push_back(input_size());
    for (const auto& l : layers) s.push_back(static_cast<std::size_t>(l.weights.rows()));
    return s;
  }

  friend bool operator==(const MlpModel& a, const MlpModel& b) {
    auto same = [](const Eigen::VectorXd& u, const Eigen::VectorXd& v) { return u.size() == v.size() && u == v; };
    return a.layers == b.layers && a.hidden == b.hidden && same(a.input_offset, b.input_offset) &&
           same(a.input_scale, b.input_scale);
  }
};

/// 13 beacons -> 20 -> 17 -> 4 zones.
inline const std::vector<std::size_t> kZoneNetworkSizes = {13, 20, 17, 4};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double shift = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - shift).exp();
  return e / e.sum();
}

/// He-initialized weights (N(0, 2/fan_in)), zero biases, identity input scaling.
inline MlpModel make_mlp(const std::vector<std::size_t>& sizes, std::uint64_t seed, Activation hidden = Activation::Relu) {
  if (sizes.size() < 2) throw Error(ErrorKind::ShapeMismatch, "an MLP needs at least input and output sizes");
  MlpModel model;
  model.hidden = hidden;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(sizes[l]);
    const auto out = static_cast<Eigen::Index>(sizes[l + 1]);
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    const double sd = std::sqrt(2.0 / static_cast<double>(in));
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) layer.weights(r, c) = rng.normal(0.0, sd);
    }
    model.layers.push_back(std::move(layer));
  }
  model.input_offset = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sizes.front()));
  model.input_scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(sizes.front()));
  return model;
}

namespace detail {

inline void check_input(const MlpModel& model, Eigen::Index cols) {
  if (model.layers.empty()) throw Error(ErrorKind::ShapeMismatch, "model has no layers");
  if (static_cast<std::size_t>(cols) != model.input_size()) {
    throw Error(ErrorKind::ShapeMismatch, "input has " + std::to_string(cols) + " features, model expects " +
                                              std::to_string(model.input_size()));
  }
  for (std::size_t l = 1; l < model.layers.size(); ++l) {
    if (model.layers[l].weights.cols() != model.layers[l - 1].weights.rows()) {
      throw Error(ErrorKind::ShapeMismatch, "layer sizes are inconsistent");
    }
  }
  for (const auto& layer : model.layers) {
    if (layer.bias.size() != layer.weights.rows()) throw Error(ErrorKind::ShapeMismatch, "bias size mismatch");
  }
}

inline Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a) {
  if (a == Activation::Relu) return z.cwiseMax(0.0);
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

inline Eigen::MatrixXd activation_derivative(const Eigen::MatrixXd& z, Activation a) {
  if (a == Activation::Relu) return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
  return z.unaryExpr([](double v) {
    const double s = sigmoid(v);
    return s * (1.0 - s);
  });
}

/// Column-wise softmax.
inline Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) out.col(c) = softmax(logits.col(c));
  return out;
}

inline Eigen::MatrixXd normalize_inputs(const MlpModel& model, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = x.transpose();  // in x B
  if (model.input_offset.size() == out.rows()) out.colwise() -= model.input_offset;
  if (model.input_scale.size() == out.rows()) out.array().colwise() /= model.input_scale.array();
  return out;
}

}  // namespace detail

/// Class probabilities for every row of x (B x in), returned as B x out.
inline Eigen::MatrixXd mlp_forward_batch(const MlpModel& model, const Eigen::MatrixXd& x) {
  detail::check_input(model, x.cols());
  Eigen::MatrixXd a = detail::normalize_inputs(model, x);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    Eigen::MatrixXd z = model.layers[l].weights * a;
    z.colwise() += model.layers[l].bias;
    a = l + 1 < model.layers.size() ? detail::activate(z, model.hidden) : detail::softmax_columns(z);
  }
  return a.transpose();
}

inline Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::RowVectorXd& x) {
  return mlp_forward_batch(model, Eigen::MatrixXd(x)).row(0).transpose();
}

struct MlpGradients {
  double loss = 0.0;                   // mean cross-entropy over the batch
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::MatrixXd inputs;              // B x in, d(mean loss)/d(raw input)
};

/// Mean cross-entropy of the batch and its gradients by backpropagation.
inline MlpGradients mlp_gradients(const MlpModel& model, const Eigen::MatrixXd& x, const std::vector<std::size_t>& labels) {
  detail::check_input(model, x.cols());
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw Error(ErrorKind::ShapeMismatch, "one label per row required");
  if (labels.empty()) throw Error(ErrorKind::EmptyDataset, "empty batch");
  const std::size_t depth = model.layers.size();
  const auto batch = static_cast<double>(labels.size());

  std::vector<Eigen::MatrixXd> acts{detail::normalize_inputs(model, x)};
  std::vector<Eigen::MatrixXd> pre;
  for (std::size_t l = 0; l < depth; ++l) {
    Eigen::MatrixXd z = model.layers[l].weights * acts.back();
    z.colwise() += model.layers[l].bias;
    pre.push_back(z);
    acts.push_back(l + 1 < depth ? detail::activate(z, model.hidden) : detail::softmax_columns(z));
  }

  MlpGradients g;
  Eigen::MatrixXd delta = acts.back();  // out x B
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= model.output_size()) throw Error(ErrorKind::ShapeMismatch, "label out of range");
    const auto c = static_cast<Eigen::Index>(i);
    const auto y = static_cast<Eigen::Index>(labels[i]);
    g.loss -= std::log(std::max(acts.back()(y, c), 1e-300));
    delta(y, c) -= 1.0;
  }
  g.loss /= batch;
  delta /= batch;

  g.weights.resize(depth);
  g.biases.resize(depth);
  for (std::size_t l = depth; l-- > 0;) {
    g.weights[l] = delta * acts[l].transpose();
    g.biases[l] = delta.rowwise().sum();
    delta = model.layers[l].weights.transpose() * delta;
    if (l > 0) delta = delta.cwiseProduct(detail::activation_derivative(pre[l - 1], model.hidden));
  }
  Eigen::MatrixXd dx = delta;  // in x B, w.r.t. normalized inputs
  if (model.input_scale.size() == dx.rows()) dx.array().colwise() /= model.input_scale.array();
  g.inputs = dx.transpose();
  return g;
}

inline double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& x, const std::vector<std::size_t>& labels) {
  const Eigen::MatrixXd p = mlp_forward_batch(model, x);
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    loss -= std::log(std::max(p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labels[i])), 1e-300));
  }
  return loss / static_cast<double>(labels.size());
}

inline std::vector<std::size_t> mlp_predict(const MlpModel& model, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd p = mlp_forward_batch(model, x);
  std::vector<std::size_t> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index best;
    p.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return out;
}

inline double accuracy(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& actual) {
  if (actual.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) hits += predicted[i] == actual[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(actual.size());
}

struct MlpTrainOptions {
  double learning_rate = 0.01;
  std::size_t batch_size = 10;
  std::size_t epochs = 100;
  std::uint64_t seed = 42;
  bool standardize_inputs = false;  // fit input_offset/input_scale on the training set
};

struct MlpTrainResult {
  MlpModel model;
  std::vector<double> train_accuracy;    // per epoch
  std::vector<double> heldout_accuracy;  // per epoch, empty without a held-out set
};

/// Mini-batch gradient descent on mean cross-entropy; rows are reshuffled
/// every epoch from the seeded stream.
inline MlpTrainResult mlp_train(MlpModel model, const ClassificationDataset& train, const MlpTrainOptions& options,
                                const ClassificationDataset* heldout = nullptr) {
  if (train.rows() == 0) throw Error(ErrorKind::EmptyDataset, "no training rows");
  if (!(options.learning_rate >= 0.0)) throw Error(ErrorKind::Config, "learning rate must be >= 0");
  if (options.batch_size < 1) throw Error(ErrorKind::Config, "batch size must be >= 1");
  detail::check_input(model, train.features.cols());

  if (options.standardize_inputs) {
    model.input_offset = train.features.colwise().mean().transpose();
    Eigen::VectorXd sd = ((train.features.rowwise() - model.input_offset.transpose()).array().square().colwise().mean()).sqrt().transpose();
    for (Eigen::Index i = 0; i < sd.size(); ++i) sd(i) = sd(i) > 0.0 ? sd(i) : 1.0;
    model.input_scale = sd;
  }

  MlpTrainResult result;
  Rng rng(options.seed);
  std::vector<std::size_t> order(train.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto in = train.features.cols();
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      Eigen::MatrixXd xb(static_cast<Eigen::Index>(end - start), in);
      std::vector<std::size_t> yb;
      yb.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        xb.row(static_cast<Eigen::Index>(i - start)) = train.features.row(static_cast<Eigen::Index>(order[i]));
        yb.push_back(train.labels[order[i]]);
      }
      if (options.learning_rate == 0.0) continue;
      const auto g = mlp_gradients(model, xb, yb);
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        model.layers[l].weights -= options.learning_rate * g.weights[l];
        model.layers[l].bias -= options.learning_rate * g.biases[l];
      }
    }
    result.train_accuracy.push_back(accuracy(mlp_predict(model, train.features), train.labels));
    if (heldout != nullptr && heldout->rows() > 0) {
      result.heldout_accuracy.push_back(accuracy(mlp_predict(model, heldout->features), heldout->labels));
    }
  }
  result.model = std::move(model);
  return result;
}

}  // namespace rssiloc
