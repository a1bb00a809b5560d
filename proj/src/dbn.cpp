#include "gdv/dbn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gdv/error.hpp"
#include "gdv/random.hpp"

namespace gdv {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix sample_bernoulli(const Matrix &probabilities, Rng &rng) {
  Matrix states(probabilities.rows(), probabilities.cols());
  for (Eigen::Index r = 0; r < probabilities.rows(); ++r) {
    for (Eigen::Index c = 0; c < probabilities.cols(); ++c) {
      states(r, c) = rng.uniform() < probabilities(r, c) ? 1.0 : 0.0;
    }
  }
  return states;
}

void check_unit_interval(const Matrix &data) {
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      const double v = data(r, c);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorKind::InvalidInput, "value " + std::to_string(v) + " at row " + std::to_string(r) +
                                                 ", column " + std::to_string(c) + " is outside [0, 1]");
      }
    }
  }
}

}  // namespace

void RbmParams::validate() const {
  if (weights.rows() < 1 || weights.cols() < 1) throw Error(ErrorKind::ShapeMismatch, "empty RBM");
  if (visible_bias.size() != weights.cols() || hidden_bias.size() != weights.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "RBM bias sizes do not match the weight matrix");
  }
  if (!weights.allFinite() || !visible_bias.allFinite() || !hidden_bias.allFinite()) {
    throw Error(ErrorKind::NonFiniteValue, "RBM parameters are not finite");
  }
}

void RbmTrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::InvalidSpec, "learning rate must be positive");
  if (cd_steps < 1) throw Error(ErrorKind::InvalidSpec, "cd_steps must be at least 1");
  if (batch_size < 1) throw Error(ErrorKind::InvalidSpec, "batch size must be at least 1");
  if (!(init_stddev >= 0.0)) throw Error(ErrorKind::InvalidSpec, "init stddev must be non-negative");
}

Matrix rbm_hidden_input(const RbmParams &rbm, const Matrix &visible) {
  if (visible.cols() != rbm.weights.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "visible width " + std::to_string(visible.cols()) + " != RBM visible width " +
                                              std::to_string(rbm.weights.cols()));
  }
  Matrix z = visible * rbm.weights.transpose();
  z.rowwise() += rbm.hidden_bias.transpose();
  return z;
}

Matrix rbm_hidden_probabilities(const RbmParams &rbm, const Matrix &visible) {
  return rbm_hidden_input(rbm, visible).unaryExpr(&sigmoid);
}

Matrix rbm_visible_probabilities(const RbmParams &rbm, const Matrix &hidden) {
  if (hidden.cols() != rbm.weights.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "hidden width " + std::to_string(hidden.cols()) + " != RBM hidden width " +
                                              std::to_string(rbm.weights.rows()));
  }
  Matrix z = hidden * rbm.weights;
  z.rowwise() += rbm.visible_bias.transpose();
  return z.unaryExpr(&sigmoid);
}

RbmParams rbm_init(std::size_t visible_width, std::size_t hidden_width, double init_stddev, std::uint64_t seed) {
  if (visible_width < 1 || hidden_width < 1) throw Error(ErrorKind::InvalidSpec, "RBM widths must be at least 1");
  RbmParams rbm;
  rbm.weights.resize(static_cast<Eigen::Index>(hidden_width), static_cast<Eigen::Index>(visible_width));
  Rng rng(seed);
  for (Eigen::Index i = 0; i < rbm.weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < rbm.weights.cols(); ++j) rbm.weights(i, j) = init_stddev * rng.normal();
  }
  rbm.visible_bias = Vector::Zero(static_cast<Eigen::Index>(visible_width));
  rbm.hidden_bias = Vector::Zero(static_cast<Eigen::Index>(hidden_width));
  return rbm;
}

double rbm_reconstruction_error(const RbmParams &rbm, const Matrix &data) {
  const Matrix reconstruction = rbm_visible_probabilities(rbm, rbm_hidden_probabilities(rbm, data));
  return (reconstruction - data).squaredNorm() / static_cast<double>(data.size());
}

Matrix rbm_gibbs_sample(const RbmParams &rbm, const Matrix &visible, std::size_t steps, std::uint64_t seed) {
  Rng rng(seed);
  Matrix v = visible;
  for (std::size_t s = 0; s < steps; ++s) {
    const Matrix h = sample_bernoulli(rbm_hidden_probabilities(rbm, v), rng);
    v = sample_bernoulli(rbm_visible_probabilities(rbm, h), rng);
  }
  return v;
}

RbmTraining rbm_train_cd(std::size_t visible_width, std::size_t hidden_width, const Matrix &data,
                         const RbmTrainConfig &config) {
  config.validate();
  if (static_cast<std::size_t>(data.cols()) != visible_width) {
    throw Error(ErrorKind::ShapeMismatch, "data width " + std::to_string(data.cols()) + " != visible width " +
                                              std::to_string(visible_width));
  }
  if (data.rows() < 1) throw Error(ErrorKind::InvalidInput, "no training rows");
  check_unit_interval(data);

  RbmTraining result;
  result.params = rbm_init(visible_width, hidden_width, config.init_stddev, derive_seed(config.seed, 1));
  RbmParams &rbm = result.params;
  Rng rng(config.seed, 2);

  std::vector<std::size_t> order(static_cast<std::size_t>(data.rows()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      Matrix v0(static_cast<Eigen::Index>(stop - start), data.cols());
      for (std::size_t i = start; i < stop; ++i) {
        v0.row(static_cast<Eigen::Index>(i - start)) = data.row(static_cast<Eigen::Index>(order[i]));
      }
      const Matrix h0 = sample_bernoulli(rbm_hidden_probabilities(rbm, v0), rng);

      Matrix h = h0;
      Matrix v;
      Matrix ph;
      for (std::size_t step = 1; step <= config.cd_steps; ++step) {
        const Matrix pv = rbm_visible_probabilities(rbm, h);
        const bool last = step == config.cd_steps;
        v = last ? pv : sample_bernoulli(pv, rng);
        ph = rbm_hidden_probabilities(rbm, v);
        if (!last) h = sample_bernoulli(ph, rng);
      }

      const double rate = config.learning_rate / static_cast<double>(v0.rows());
      rbm.weights += rate * (h0.transpose() * v0 - ph.transpose() * v);
      rbm.visible_bias += rate * (v0 - v).colwise().sum().transpose();
      rbm.hidden_bias += rate * (h0 - ph).colwise().sum().transpose();
    }
    if (config.track_reconstruction) result.reconstruction_error.push_back(rbm_reconstruction_error(rbm, data));
  }
  return result;
}

std::vector<std::size_t> DbnModel::widths() const {
  std::vector<std::size_t> out;
  if (layers.empty()) return out;
  out.push_back(layers.front().visible_width());
  for (const auto &rbm : layers) out.push_back(rbm.hidden_width());
  return out;
}

void DbnModel::validate() const {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].validate();
    if (l > 0 && layers[l].visible_width() != layers[l - 1].hidden_width()) {
      throw Error(ErrorKind::ShapeMismatch, "RBM " + std::to_string(l) + " does not chain onto its predecessor");
    }
  }
}

DbnModel dbn_train_greedy(std::span<const std::size_t> layer_widths, const Matrix &data,
                          const DbnTrainConfig &config) {
  if (layer_widths.size() < 2) throw Error(ErrorKind::InvalidSpec, "need an input width and at least one hidden width");
  const std::size_t n_rbms = layer_widths.size() - 1;
  if (config.epochs_per_layer.size() != 1 && config.epochs_per_layer.size() != n_rbms) {
    throw Error(ErrorKind::InvalidSpec, "epochs_per_layer needs one entry or one per RBM");
  }
  if (static_cast<std::size_t>(data.cols()) != layer_widths.front()) {
    throw Error(ErrorKind::ShapeMismatch, "data width does not match the input width");
  }

  DbnModel model;
  Matrix representation = data;
  for (std::size_t l = 0; l < n_rbms; ++l) {
    RbmTrainConfig rbm_config = config.rbm;
    rbm_config.epochs = config.epochs_per_layer.size() == 1 ? config.epochs_per_layer.front() : config.epochs_per_layer[l];
    rbm_config.seed = derive_seed(config.rbm.seed, l);
    RbmTraining trained = rbm_train_cd(layer_widths[l], layer_widths[l + 1], representation, rbm_config);
    if (l + 1 < n_rbms) representation = rbm_hidden_probabilities(trained.params, representation);
    model.layers.push_back(std::move(trained.params));
  }
  return model;
}

Matrix dbn_propagate(const DbnModel &model, const Matrix &inputs, std::size_t layer_index) {
  if (layer_index > model.depth()) {
    throw Error(ErrorKind::LayerOutOfRange,
                "layer " + std::to_string(layer_index) + " requested, model depth is " + std::to_string(model.depth()));
  }
  Matrix values = inputs;
  for (std::size_t l = 0; l < layer_index; ++l) values = rbm_hidden_probabilities(model.layers[l], values);
  return values;
}

LabeledDataset dbn_layer_representation(const DbnModel &model, const LabeledDataset &inputs,
                                        std::size_t layer_index) {
  LabeledDataset out;
  out.points = dbn_propagate(model, inputs.points, layer_index);
  out.labels = inputs.labels;
  out.class_names = inputs.class_names;
  return out;
}

std::vector<LayerData> dbn_layer_representations(const DbnModel &model, const LabeledDataset &inputs) {
  std::vector<LayerData> layers;
  layers.reserve(model.depth() + 1);
  LabeledDataset current = inputs;
  layers.push_back({"layer0", current});
  for (std::size_t l = 0; l < model.depth(); ++l) {
    current.points = rbm_hidden_probabilities(model.layers[l], current.points);
    layers.push_back({"layer" + std::to_string(l + 1), current});
  }
  return layers;
}

std::size_t sparsified_unit_count(std::size_t width) { return (width + 9) / 10; }

Matrix winner_takes_all(const Matrix &activity) {
  const auto width = static_cast<std::size_t>(activity.cols());
  const std::size_t keep = sparsified_unit_count(width);
  Matrix sparse = Matrix::Zero(activity.rows(), activity.cols());
  std::vector<Eigen::Index> units(width);
  for (Eigen::Index r = 0; r < activity.rows(); ++r) {
    std::iota(units.begin(), units.end(), Eigen::Index{0});
    std::partial_sort(units.begin(), units.begin() + static_cast<std::ptrdiff_t>(keep), units.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                        if (activity(r, a) != activity(r, b)) return activity(r, a) > activity(r, b);
                        return a < b;
                      });
    for (std::size_t k = 0; k < keep; ++k) sparse(r, units[k]) = 1.0;
  }
  return sparse;
}

Matrix dream_input_patterns(const DbnModel &model, const Matrix &images, std::size_t layer_index) {
  Matrix values = dbn_propagate(model, images, layer_index);
  if (layer_index == 0) return values;
  values = winner_takes_all(values);
  for (std::size_t l = layer_index; l-- > 0;) values = rbm_visible_probabilities(model.layers[l], values);
  return values;
}

PrototypeImage prototype_reconstruct(const DbnModel &model, std::size_t layer_index, Label class_id,
                                     const LabeledDataset &test_set) {
  constexpr auto side = static_cast<Eigen::Index>(kPrototypeSide);
  if (test_set.points.cols() != side * side) {
    throw Error(ErrorKind::ShapeMismatch, "prototype images need 784 input pixels");
  }
  if (layer_index > model.depth()) {
    throw Error(ErrorKind::LayerOutOfRange,
                "layer " + std::to_string(layer_index) + " requested, model depth is " + std::to_string(model.depth()));
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < test_set.labels.size(); ++i) {
    if (test_set.labels[i] == class_id) rows.push_back(i);
  }
  if (rows.empty()) throw Error(ErrorKind::NoClassImages, "no test image of class " + std::to_string(class_id));

  const LabeledDataset images = select_rows(test_set, rows);
  const Matrix patterns = dream_input_patterns(model, images.points, layer_index);
  Eigen::RowVectorXd mean = patterns.colwise().mean();

  const double lo = mean.minCoeff();
  const double hi = mean.maxCoeff();
  if (hi > lo) {
    mean = (mean.array() - lo) / (hi - lo);
  } else {
    mean.setZero();
  }
  PrototypeImage image;
  image.class_id = class_id;
  image.layer_index = layer_index;
  image.pixels = Eigen::Map<const Matrix>(mean.data(), side, side);
  image.pixels = image.pixels.cwiseMax(0.0).cwiseMin(1.0);
  return image;
}

}  // namespace gdv
