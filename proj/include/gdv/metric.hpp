#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gdv/dataset.hpp"
#include "gdv/error.hpp"

namespace gdv {

enum class DistanceMetric { Euclidean };

std::string_view metric_name(DistanceMetric metric);
/// Throws InvalidSpec for unknown names.
DistanceMetric parse_metric(std::string_view name);

struct GdvOptions {
  DistanceMetric metric = DistanceMetric::Euclidean;
  /// Worker threads for the pairwise loops. Results are bit-identical for any
  /// thread count: per-row partial sums are reduced in row order.
  unsigned threads = 1;
};

/// Half-z-scored coordinates s = 0.5 (x - mu) / sigma of the kept dimensions.
struct ScaledDataset {
  Matrix points;
  std::vector<std::size_t> kept_dims;
  std::vector<std::size_t> dropped_dims;
  /// Indexed by original dimension; sigma is 0 for dropped dimensions.
  std::vector<double> per_dim_mean;
  std::vector<double> per_dim_std;

  std::size_t effective_dim() const noexcept { return kept_dims.size(); }
};

/// Population statistics (divide by N). A dimension whose values are all
/// identical is dropped. Throws AllDimensionsConstant if nothing is left.
ScaledDataset z_score_half(const LabeledDataset &data);

/// Mean distance over the unordered pairs of `members`. Throws ClassTooSmall
/// for fewer than two members.
double mean_intra_class_distance(const ScaledDataset &scaled, std::span<const std::size_t> members,
                                 const GdvOptions &options = {});

/// Mean distance over all cross pairs. Throws EmptyClass if either set is empty.
double mean_inter_class_distance(const ScaledDataset &scaled, std::span<const std::size_t> members_l,
                                 std::span<const std::size_t> members_m,
                                 const GdvOptions &options = {});

struct ClassPair {
  Label first;
  Label second;

  auto operator<=>(const ClassPair &) const = default;
};

struct GdvReport {
  double gdv = 0.0;
  std::map<Label, double> intra;
  std::map<ClassPair, double> inter;
  std::map<Label, std::size_t> class_counts;
  std::size_t effective_dim = 0;
  std::size_t n_classes = 0;
  std::string metric_name;
};

/// Evaluates the discrimination value from the report's intra, inter and
/// effective_dim fields alone. Class terms are summed in ascending value order.
double recompute_gdv(const GdvReport &report);

/// Summation order is canonical: scaled columns are sorted lexicographically,
/// each class pair iterates the class with the lower first row index outermost,
/// and per-row partial sums are reduced in row order. Column permutations and
/// label renamings therefore give bit-identical results, for any thread count.
/// Errors: SingleClass, ClassTooSmall, AllDimensionsConstant, plus the
/// dataset validation errors.
GdvReport compute_gdv(const LabeledDataset &data, const GdvOptions &options = {});

struct LayerData {
  std::string layer_id;
  LabeledDataset data;
};

struct CurvePoint {
  std::string layer_id;
  std::optional<double> gdv;
  /// Set when the layer was degenerate and `gdv` is missing.
  std::optional<ErrorKind> failure;
};

struct GdvCurve {
  std::vector<CurvePoint> points;

  std::size_t size() const noexcept { return points.size(); }
};

/// GDV per layer in input order. Label-level problems (SingleClass,
/// ClassTooSmall, LabelMismatch) throw; per-layer geometric degeneracy is
/// recorded as a gap.
GdvCurve gdv_curve(std::span<const LayerData> layers, const GdvOptions &options = {});

}  // namespace gdv
