#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gdv/dataset.hpp"
#include "gdv/metric.hpp"

namespace gdv {

enum class Activation { Relu, Tanh, Logistic };

std::string_view to_string(Activation activation);
Activation parse_activation(std::string_view name);

/// Fully connected classifier: hidden layers use `hidden_activation`, the
/// output layer is softmax with categorical cross-entropy, trained by
/// mini-batch ADAM.
struct MlpConfig {
  /// Input width, hidden widths..., output width (= number of classes).
  std::vector<std::size_t> layer_widths;
  Activation hidden_activation = Activation::Relu;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;

  /// Throws InvalidSpec.
  void validate() const;
};

/// y = W x + b with W stored out×in.
struct DenseLayer {
  Matrix weights;
  Vector bias;
};

struct EpochRecord {
  double loss = 0.0;
  double accuracy = 0.0;
};

struct MlpModel {
  MlpConfig config;
  std::vector<DenseLayer> layers;
  std::vector<EpochRecord> history;

  std::size_t parameter_count() const;
};

/// Hidden widths first, first - step, ... for `depth` layers (256, 246, ..., 116
/// for 15 layers). Also used as the decreasing profile of belief networks.
/// Throws InvalidSpec if a width would drop below 1.
std::vector<std::size_t> decreasing_widths(std::size_t depth, std::size_t first = 256, std::size_t step = 10);

/// Weights ~ U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)) drawn layer by layer in
/// row-major order from Rng(seed, 1); biases zero.
MlpModel mlp_init(const MlpConfig &config);

/// Errors: InvalidSpec, ShapeMismatch (input width or label range),
/// NonFiniteLoss (carries the failing epoch index).
MlpModel mlp_train(const MlpConfig &config, const LabeledDataset &train);

/// Output-layer pre-activations, one row per input.
Matrix mlp_logits(const MlpModel &model, const Matrix &inputs);
/// Row-wise softmax of the logits.
Matrix mlp_probabilities(const MlpModel &model, const Matrix &inputs);

struct MlpGradient {
  double loss = 0.0;
  std::vector<DenseLayer> layers;
};

/// Mean cross-entropy over the rows and its gradient for every parameter.
MlpGradient mlp_loss_gradient(const MlpModel &model, const Matrix &inputs, std::span<const Label> labels);
double mlp_loss(const MlpModel &model, const Matrix &inputs, std::span<const Label> labels);

struct AdamState {
  std::vector<DenseLayer> first_moment;
  std::vector<DenseLayer> second_moment;
  std::size_t steps = 0;
};

AdamState adam_init(const std::vector<DenseLayer> &params);
/// One bias-corrected ADAM update of `params` in place.
void adam_step(std::vector<DenseLayer> &params, const std::vector<DenseLayer> &gradient, AdamState &state,
               const MlpConfig &config);

/// Layer 0 is the raw input ("input"), followed by the post-activation of each
/// hidden layer ("hidden1"..) and the pre-softmax output ("output"). Every
/// entry carries the input labels.
std::vector<LayerData> mlp_layer_activations(const MlpModel &model, const LabeledDataset &inputs);

/// Fraction of rows whose arg-max logit equals the label (ties go to the lowest
/// class id).
double mlp_accuracy(const MlpModel &model, const LabeledDataset &test);

}  // namespace gdv
