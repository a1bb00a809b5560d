#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gdv/dataset.hpp"
#include "gdv/metric.hpp"

namespace gdv {

/// Restricted Boltzmann machine with logistic units. The total input of hidden
/// unit i is z_i = b_i + sum_j w_ij y_j and its firing probability sigma(z_i).
struct RbmParams {
  Matrix weights;  // hidden × visible
  Vector visible_bias;
  Vector hidden_bias;

  std::size_t visible_width() const noexcept { return static_cast<std::size_t>(weights.cols()); }
  std::size_t hidden_width() const noexcept { return static_cast<std::size_t>(weights.rows()); }
  void validate() const;
};

struct RbmTrainConfig {
  std::size_t epochs = 5;
  double learning_rate = 0.05;
  std::size_t cd_steps = 1;
  std::size_t batch_size = 32;
  /// Weights start as N(0, init_stddev^2); biases at zero.
  double init_stddev = 0.01;
  std::uint64_t seed = 1;
  /// Record the mean-field reconstruction error after every epoch.
  bool track_reconstruction = false;

  void validate() const;
};

struct RbmTraining {
  RbmParams params;
  std::vector<double> reconstruction_error;
};

/// z = b + W y for every row y of `visible`.
Matrix rbm_hidden_input(const RbmParams &rbm, const Matrix &visible);
Matrix rbm_hidden_probabilities(const RbmParams &rbm, const Matrix &visible);
/// Downward pass sigma(a + W^T h).
Matrix rbm_visible_probabilities(const RbmParams &rbm, const Matrix &hidden);

RbmParams rbm_init(std::size_t visible_width, std::size_t hidden_width, double init_stddev, std::uint64_t seed);

/// Mean squared difference between `data` and its mean-field reconstruction.
double rbm_reconstruction_error(const RbmParams &rbm, const Matrix &data);

/// Alternating Gibbs chain started from `visible`, returning sampled binary
/// visible states after `steps` full up-down sweeps.
Matrix rbm_gibbs_sample(const RbmParams &rbm, const Matrix &visible, std::size_t steps, std::uint64_t seed);

/// CD-k on mini-batches. Positive statistics use sampled hidden states, the
/// chain runs k alternations (intermediate visible states sampled), and the
/// final negative phase uses visible and hidden probabilities.
/// Errors: InvalidInput (values outside [0, 1]), ShapeMismatch, InvalidSpec.
RbmTraining rbm_train_cd(std::size_t visible_width, std::size_t hidden_width, const Matrix &data,
                         const RbmTrainConfig &config);

/// Stack of RBMs where layer l's hidden width equals layer l+1's visible width.
struct DbnModel {
  std::vector<RbmParams> layers;

  std::size_t depth() const noexcept { return layers.size(); }
  /// Input width followed by every hidden width.
  std::vector<std::size_t> widths() const;
  void validate() const;
};

struct DbnTrainConfig {
  /// One entry per RBM, or a single entry used for all of them.
  std::vector<std::size_t> epochs_per_layer{5};
  RbmTrainConfig rbm;
};

/// Greedy layer-wise training. RBM l is trained on the hidden probabilities of
/// layer l-1 with seed derive_seed(seed, l), so a one-layer stack reproduces
/// rbm_train_cd with the same seed exactly.
DbnModel dbn_train_greedy(std::span<const std::size_t> layer_widths, const Matrix &data,
                          const DbnTrainConfig &config);

/// Deterministic upward pass with probabilities. Layer 0 is the input itself.
Matrix dbn_propagate(const DbnModel &model, const Matrix &inputs, std::size_t layer_index);

/// Throws LayerOutOfRange for layer_index > depth.
LabeledDataset dbn_layer_representation(const DbnModel &model, const LabeledDataset &inputs,
                                        std::size_t layer_index);

/// Every layer 0..depth, ids "layer0".."layerN".
std::vector<LayerData> dbn_layer_representations(const DbnModel &model, const LabeledDataset &inputs);

/// Number of units kept active by the winner-takes-all step: ceil(0.1 width).
std::size_t sparsified_unit_count(std::size_t width);

/// Per row: the ceil(0.1 width) largest entries become 1, all others 0; ties
/// go to the lowest unit index.
Matrix winner_takes_all(const Matrix &activity);

/// Image-specific input patterns: each row of `images` is propagated up to
/// `layer_index`, sparsified and propagated back down through the transposed
/// weights with logistic units.
Matrix dream_input_patterns(const DbnModel &model, const Matrix &images, std::size_t layer_index);

inline constexpr std::size_t kPrototypeSide = 28;

struct PrototypeImage {
  Matrix pixels;  // 28 × 28, values in [0, 1]
  Label class_id = 0;
  std::size_t layer_index = 0;
};

/// Mean of the class's input patterns, min-max normalized to [0, 1]. At layer
/// 0 the plain mean of the class images is used.
/// Errors: NoClassImages, LayerOutOfRange, ShapeMismatch (input width != 784).
PrototypeImage prototype_reconstruct(const DbnModel &model, std::size_t layer_index, Label class_id,
                                     const LabeledDataset &test_set);

}  // namespace gdv
