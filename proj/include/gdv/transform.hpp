#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gdv/dataset.hpp"
#include "gdv/synthetic.hpp"

namespace gdv {

enum class TransformKind {
  RandomLinear,
  RandomLinearLogistic,
  RandomLinearDoubleDim,
  RandomLinearDoubleDimLogistic,
  ScaleLogistic,
};

inline constexpr TransformKind kAllTransformKinds[] = {
    TransformKind::RandomLinear, TransformKind::RandomLinearLogistic, TransformKind::RandomLinearDoubleDim,
    TransformKind::RandomLinearDoubleDimLogistic, TransformKind::ScaleLogistic};

std::string_view to_string(TransformKind kind);
/// Throws InvalidSpec for unknown names.
TransformKind parse_transform_kind(std::string_view name);

/// Coordinates the transform acts on.
enum class InputFrame {
  Raw,
  /// The half-z-scored coordinates the GDV itself measures.
  HalfZScored,
};

std::string_view to_string(InputFrame frame);

struct TransformSpec {
  TransformKind kind = TransformKind::RandomLinear;
  RealRange element_range{-10.0, 10.0};
  double scale_factor = 10.0;
  InputFrame frame = InputFrame::Raw;
  std::uint64_t seed = 0;

  void validate() const;
};

double logistic(double x) noexcept;

/// Row-wise y = A x, optionally followed by the element-wise logistic.
LabeledDataset apply_matrix(const LabeledDataset &data, const Matrix &matrix, bool with_logistic);

/// Draws a fresh matrix with i.i.d. uniform entries from Rng(spec.seed) and
/// applies it (D -> D, or D -> 2D for the double-dim kinds). ScaleLogistic
/// multiplies every coordinate by scale_factor and applies the logistic.
LabeledDataset apply_transform(const LabeledDataset &data, const TransformSpec &spec);

/// Uniform bins over [lo, hi]; values outside are clamped into the edge bins.
class Histogram {
 public:
  Histogram(double lo = -0.15, double hi = 0.15, std::size_t bins = 61);

  void add(double value);
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t bins() const noexcept { return counts_.size(); }
  std::size_t total() const noexcept { return total_; }
  const std::vector<std::size_t> &counts() const noexcept { return counts_; }
  double bin_center(std::size_t bin) const;

 private:
  double lo_;
  double hi_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

/// Half the L1 distance between the normalized histograms. Throws
/// InvalidInput if the binning differs.
double total_variation(const Histogram &a, const Histogram &b);

struct DeltaGdvStats {
  TransformKind kind = TransformKind::RandomLinear;
  InputFrame frame = InputFrame::HalfZScored;
  double mean_before = 0.0;
  double mean_after = 0.0;
  double mean_delta = 0.0;
  double stddev_delta = 0.0;
  double min_delta = 0.0;
  double max_delta = 0.0;
  Histogram histogram;
  std::size_t n_valid = 0;
  /// Datasets with a size-1 class plus those whose transformed copy was degenerate.
  std::size_t n_skipped = 0;
  std::size_t n_small_class = 0;
  std::size_t n_degenerate = 0;
};

struct EnsembleGdvStats {
  double mean_gdv = 0.0;
  double stddev_gdv = 0.0;
  double min_gdv = 0.0;
  double max_gdv = 0.0;
  Histogram histogram{-0.8, 0.2, 51};
  std::size_t n_valid = 0;
  std::size_t n_skipped = 0;
  /// GDV per ensemble index; NaN for skipped members.
  std::vector<double> values;
};

struct DeltaOptions {
  InputFrame frame = InputFrame::HalfZScored;
  std::uint64_t transform_seed = 0x5EEDF00DULL;
  unsigned threads = 1;
};

/// GDV of every ensemble member with no class smaller than two points.
EnsembleGdvStats ensemble_gdv(const EnsembleConfig &cfg, unsigned threads = 1);

/// One statistics block per kind, all computed on the same ensemble members.
/// The matrix for member k and kind q comes from its own stream, so adding or
/// removing kinds never changes another kind's draws.
std::vector<DeltaGdvStats> delta_gdv_experiments(const EnsembleConfig &cfg, std::span<const TransformKind> kinds,
                                                 const DeltaOptions &options = {});

DeltaGdvStats delta_gdv_experiment(EnsembleConfig cfg, TransformKind kind, std::size_t n_datasets,
                                   const DeltaOptions &options = {});

}  // namespace gdv
