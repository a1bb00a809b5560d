#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gdv/dataset.hpp"

namespace gdv {

/// Axis-aligned Gaussian clusters. `sigmas` is either 1×D (shared by every
/// class) or K×D (one row per class).
struct ClusterSpec {
  Matrix centers;
  Matrix sigmas;
  std::vector<std::size_t> points_per_class;
  std::uint64_t seed = 0;

  /// Throws InvalidSpec.
  void validate() const;
};

/// Points are drawn class by class, row by row, coordinate by coordinate from
/// Rng(seed); labels are 0..K-1.
LabeledDataset generate_clusters(const ClusterSpec &spec);

/// Two 2-D classes centred at (0,0) and (1,1) with isotropic `sigma`.
ClusterSpec two_cluster_spec(double sigma, std::size_t points_per_class, std::uint64_t seed);

/// (x, y) -> (x, y, y). Throws WrongDimension unless D == 2.
LabeledDataset embed_duplicate_y(const LabeledDataset &data);

/// Appends copies of existing coordinates, cycling backwards from the last
/// one, until the dataset has `target_dim` columns. For 2-D input this gives
/// (x, y, y, x, y, x, ...); every even target is a permuted full duplication.
LabeledDataset embed_by_replication(const LabeledDataset &data, std::size_t target_dim);

/// Maps each point (x_1..x_D) to (x_1..x_D, x_1..x_D).
LabeledDataset duplicate_all_coordinates(const LabeledDataset &data);

/// Two isotropic unit-sigma classes in `dim` dimensions, evaluated under both
/// readings of "mean inter-cluster distance equals twice the standard
/// deviation": centre distance 2 sigma, and mean inter-class pair distance
/// 2 sigma. The second is reachable only while the zero-offset pair distance
/// stays below 2 sigma (dim <= 2); otherwise it is NaN.
struct SeparationProbe {
  std::size_t dim = 0;
  double gdv_center_reading = 0.0;
  double gdv_pair_reading = 0.0;
  /// Centre offset that made the sample's mean inter-class distance 2 sigma.
  double pair_reading_offset = 0.0;
};

SeparationProbe probe_two_sigma_separation(std::size_t dim, std::size_t points_per_class, std::uint64_t seed);

struct IntRange {
  std::uint64_t lo;
  std::uint64_t hi;
};

struct RealRange {
  double lo;
  double hi;
};

enum class SigmaMode { PerClass, Shared };
enum class SizeMode { PerClass, PerDataset };

std::string_view to_string(SigmaMode mode);
std::string_view to_string(SizeMode mode);

/// Random ensemble of Gaussian datasets. All integer ranges are inclusive and
/// sampled uniformly.
struct EnsembleConfig {
  std::size_t n_datasets = 10000;
  IntRange dim_range{2, 10};
  IntRange class_range{2, 10};
  IntRange points_range{1, 100};
  RealRange center_range{0.0, 1.0};
  RealRange sigma_range{0.0, 1.0};
  /// PerClass: each class draws its own per-dimension sigmas.
  SigmaMode sigma_mode = SigmaMode::PerClass;
  /// PerClass: each class draws its own point count.
  SizeMode size_mode = SizeMode::PerClass;
  std::uint64_t seed = 20190701;

  void validate() const;
};

struct EnsembleMember {
  std::size_t index = 0;
  LabeledDataset data;
  /// True when some class has fewer than two points.
  bool has_small_class = false;
};

/// Dataset k is drawn from its own stream Rng(seed, k + 1), so members can be
/// generated independently and in any order.
class Ensemble {
 public:
  explicit Ensemble(EnsembleConfig config);

  std::size_t size() const noexcept { return config_.n_datasets; }
  const EnsembleConfig &config() const noexcept { return config_; }
  EnsembleMember at(std::size_t index) const;

 private:
  EnsembleConfig config_;
};

}  // namespace gdv
