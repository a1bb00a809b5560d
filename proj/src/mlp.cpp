#include "gdv/mlp.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "gdv/error.hpp"
#include "gdv/random.hpp"

namespace gdv {

std::string_view to_string(Activation activation) {
  switch (activation) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Logistic: return "logistic";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "logistic" || name == "sigmoid") return Activation::Logistic;
  throw Error(ErrorKind::InvalidSpec, "unknown activation '" + std::string(name) + "'");
}

void MlpConfig::validate() const {
  if (layer_widths.size() < 3) throw Error(ErrorKind::InvalidSpec, "need input, at least one hidden and an output width");
  for (std::size_t w : layer_widths) {
    if (w < 1) throw Error(ErrorKind::InvalidSpec, "layer widths must be at least 1");
  }
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::InvalidSpec, "learning rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw Error(ErrorKind::InvalidSpec, "ADAM betas must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidSpec, "ADAM epsilon must be positive");
  if (batch_size < 1) throw Error(ErrorKind::InvalidSpec, "batch size must be at least 1");
}

std::size_t MlpModel::parameter_count() const {
  std::size_t count = 0;
  for (const auto &layer : layers) count += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  return count;
}

namespace {

void activate(Matrix &values, Activation activation) {
  switch (activation) {
    case Activation::Relu: values = values.cwiseMax(0.0); break;
    case Activation::Tanh: values = values.array().tanh().matrix(); break;
    case Activation::Logistic: values = values.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); }); break;
  }
}

// Derivative expressed through the activation output a = f(z).
Matrix activation_slope(const Matrix &output, Activation activation) {
  switch (activation) {
    case Activation::Relu: return output.unaryExpr([](double a) { return a > 0.0 ? 1.0 : 0.0; });
    case Activation::Tanh: return (1.0 - output.array().square()).matrix();
    case Activation::Logistic: return (output.array() * (1.0 - output.array())).matrix();
  }
  return output;
}

Matrix affine(const DenseLayer &layer, const Matrix &inputs) {
  Matrix z = inputs * layer.weights.transpose();
  z.rowwise() += layer.bias.transpose();
  return z;
}

/// Activations of every layer: [input, hidden..., logits].
std::vector<Matrix> forward_all(const MlpModel &model, const Matrix &inputs) {
  std::vector<Matrix> outputs;
  outputs.reserve(model.layers.size() + 1);
  outputs.push_back(inputs);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    Matrix z = affine(model.layers[l], outputs.back());
    if (l + 1 < model.layers.size()) activate(z, model.config.hidden_activation);
    outputs.push_back(std::move(z));
  }
  return outputs;
}

void check_inputs(const MlpModel &model, const Matrix &inputs) {
  const std::size_t expected = model.config.layer_widths.front();
  if (static_cast<std::size_t>(inputs.cols()) != expected) {
    throw Error(ErrorKind::ShapeMismatch, "input width " + std::to_string(inputs.cols()) + " != model input width " +
                                              std::to_string(expected));
  }
}

void check_labels(const MlpModel &model, std::span<const Label> labels, std::size_t rows) {
  if (labels.size() != rows) throw Error(ErrorKind::ShapeMismatch, "label count does not match input rows");
  const std::size_t classes = model.config.layer_widths.back();
  for (Label label : labels) {
    if (label >= classes) {
      throw Error(ErrorKind::ShapeMismatch,
                  "label " + std::to_string(label) + " outside output width " + std::to_string(classes));
    }
  }
}

Matrix softmax_rows(const Matrix &logits) {
  Matrix probs(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double peak = logits.row(r).maxCoeff();
    double total = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      probs(r, c) = std::exp(logits(r, c) - peak);
      total += probs(r, c);
    }
    probs.row(r) /= total;
  }
  return probs;
}

double row_cross_entropy(const Matrix &logits, Eigen::Index row, Label label) {
  const double peak = logits.row(row).maxCoeff();
  double total = 0.0;
  for (Eigen::Index c = 0; c < logits.cols(); ++c) total += std::exp(logits(row, c) - peak);
  return peak + std::log(total) - logits(row, static_cast<Eigen::Index>(label));
}

Eigen::Index argmax_row(const Matrix &values, Eigen::Index row) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < values.cols(); ++c) {
    if (values(row, c) > values(row, best)) best = c;
  }
  return best;
}

std::vector<DenseLayer> zeros_like(const std::vector<DenseLayer> &params) {
  std::vector<DenseLayer> out;
  out.reserve(params.size());
  for (const auto &layer : params) {
    out.push_back({Matrix::Zero(layer.weights.rows(), layer.weights.cols()), Vector::Zero(layer.bias.size())});
  }
  return out;
}

MlpGradient gradient_from_forward(const MlpModel &model, const std::vector<Matrix> &outputs,
                                  std::span<const Label> labels) {
  const Matrix &logits = outputs.back();
  const auto rows = logits.rows();
  const double scale = 1.0 / static_cast<double>(rows);

  MlpGradient grad;
  grad.layers.resize(model.layers.size());
  Matrix delta = softmax_rows(logits);
  for (Eigen::Index r = 0; r < rows; ++r) {
    grad.loss += row_cross_entropy(logits, r, labels[static_cast<std::size_t>(r)]);
    delta(r, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(r)])) -= 1.0;
  }
  grad.loss *= scale;
  delta *= scale;

  for (std::size_t l = model.layers.size(); l-- > 0;) {
    grad.layers[l].weights = delta.transpose() * outputs[l];
    grad.layers[l].bias = delta.colwise().sum().transpose();
    if (l > 0) {
      Matrix upstream = delta * model.layers[l].weights;
      delta = upstream.cwiseProduct(activation_slope(outputs[l], model.config.hidden_activation));
    }
  }
  return grad;
}

}  // namespace

std::vector<std::size_t> decreasing_widths(std::size_t depth, std::size_t first, std::size_t step) {
  if (depth > 0 && (depth - 1) * step >= first) {
    throw Error(ErrorKind::InvalidSpec, std::to_string(depth) + " layers starting at " + std::to_string(first) +
                                            " shrinking by " + std::to_string(step) + " reach zero width");
  }
  std::vector<std::size_t> widths(depth);
  for (std::size_t l = 0; l < depth; ++l) widths[l] = first - l * step;
  return widths;
}

MlpModel mlp_init(const MlpConfig &config) {
  config.validate();
  MlpModel model;
  model.config = config;
  Rng rng(config.seed, 1);
  for (std::size_t l = 0; l + 1 < config.layer_widths.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(config.layer_widths[l]);
    const auto fan_out = static_cast<Eigen::Index>(config.layer_widths[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    DenseLayer layer{Matrix(fan_out, fan_in), Vector::Zero(fan_out)};
    for (Eigen::Index i = 0; i < fan_out; ++i) {
      for (Eigen::Index j = 0; j < fan_in; ++j) layer.weights(i, j) = rng.uniform(-limit, limit);
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

Matrix mlp_logits(const MlpModel &model, const Matrix &inputs) {
  check_inputs(model, inputs);
  Matrix values = inputs;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    values = affine(model.layers[l], values);
    if (l + 1 < model.layers.size()) activate(values, model.config.hidden_activation);
  }
  return values;
}

Matrix mlp_probabilities(const MlpModel &model, const Matrix &inputs) {
  return softmax_rows(mlp_logits(model, inputs));
}

MlpGradient mlp_loss_gradient(const MlpModel &model, const Matrix &inputs, std::span<const Label> labels) {
  check_inputs(model, inputs);
  check_labels(model, labels, static_cast<std::size_t>(inputs.rows()));
  return gradient_from_forward(model, forward_all(model, inputs), labels);
}

double mlp_loss(const MlpModel &model, const Matrix &inputs, std::span<const Label> labels) {
  check_labels(model, labels, static_cast<std::size_t>(inputs.rows()));
  const Matrix logits = mlp_logits(model, inputs);
  double loss = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) loss += row_cross_entropy(logits, r, labels[static_cast<std::size_t>(r)]);
  return loss / static_cast<double>(logits.rows());
}

AdamState adam_init(const std::vector<DenseLayer> &params) {
  return AdamState{zeros_like(params), zeros_like(params), 0};
}

void adam_step(std::vector<DenseLayer> &params, const std::vector<DenseLayer> &gradient, AdamState &state,
               const MlpConfig &config) {
  ++state.steps;
  const double t = static_cast<double>(state.steps);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  const double lr = config.learning_rate;
  const double eps = config.epsilon;

  auto update = [&](auto &param, const auto &grad, auto &m, auto &v) {
    m = config.beta1 * m + (1.0 - config.beta1) * grad;
    v = config.beta2 * v + (1.0 - config.beta2) * grad.cwiseProduct(grad);
    param.array() -= lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < params.size(); ++l) {
    update(params[l].weights, gradient[l].weights, state.first_moment[l].weights, state.second_moment[l].weights);
    update(params[l].bias, gradient[l].bias, state.first_moment[l].bias, state.second_moment[l].bias);
  }
}

MlpModel mlp_train(const MlpConfig &config, const LabeledDataset &train) {
  train.validate();
  MlpModel model = mlp_init(config);
  check_inputs(model, train.points);
  check_labels(model, train.labels, train.size());

  AdamState adam = adam_init(model.layers);
  Rng rng(config.seed, 2);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::size_t width = train.dim();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const auto rows = static_cast<Eigen::Index>(stop - start);
      Matrix batch(rows, static_cast<Eigen::Index>(width));
      std::vector<Label> labels(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        batch.row(static_cast<Eigen::Index>(i - start)) = train.points.row(static_cast<Eigen::Index>(order[i]));
        labels[i - start] = train.labels[order[i]];
      }
      const std::vector<Matrix> outputs = forward_all(model, batch);
      for (Eigen::Index r = 0; r < rows; ++r) {
        if (argmax_row(outputs.back(), r) == static_cast<Eigen::Index>(labels[static_cast<std::size_t>(r)])) ++correct;
      }
      MlpGradient grad = gradient_from_forward(model, outputs, labels);
      loss_sum += grad.loss * static_cast<double>(rows);
      adam_step(model.layers, grad.layers, adam, config);
    }
    const double loss = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(loss)) {
      throw Error(ErrorKind::NonFiniteLoss, "loss diverged in epoch " + std::to_string(epoch));
    }
    model.history.push_back({loss, static_cast<double>(correct) / static_cast<double>(order.size())});
  }
  return model;
}

std::vector<LayerData> mlp_layer_activations(const MlpModel &model, const LabeledDataset &inputs) {
  check_inputs(model, inputs.points);
  std::vector<Matrix> outputs = forward_all(model, inputs.points);
  std::vector<LayerData> layers;
  layers.reserve(outputs.size());
  for (std::size_t l = 0; l < outputs.size(); ++l) {
    std::string id = l == 0 ? "input" : (l + 1 == outputs.size() ? "output" : "hidden" + std::to_string(l));
    LabeledDataset data;
    data.points = std::move(outputs[l]);
    data.labels = inputs.labels;
    data.class_names = inputs.class_names;
    layers.push_back({std::move(id), std::move(data)});
  }
  return layers;
}

double mlp_accuracy(const MlpModel &model, const LabeledDataset &test) {
  check_inputs(model, test.points);
  if (test.labels.size() != test.size() || test.size() == 0) {
    throw Error(ErrorKind::ShapeMismatch, "test set needs one label per row");
  }
  const Matrix logits = mlp_logits(model, test.points);
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    if (argmax_row(logits, r) == static_cast<Eigen::Index>(test.labels[static_cast<std::size_t>(r)])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace gdv
