#include "gdv/synthetic.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "gdv/error.hpp"
#include "gdv/metric.hpp"
#include "gdv/random.hpp"

namespace gdv {

void ClusterSpec::validate() const {
  const auto classes = centers.rows();
  const auto dims = centers.cols();
  if (classes < 1 || dims < 1) throw Error(ErrorKind::InvalidSpec, "need at least one class and one dimension");
  if (sigmas.cols() != dims || (sigmas.rows() != 1 && sigmas.rows() != classes)) {
    throw Error(ErrorKind::InvalidSpec, "sigmas must be 1xD or KxD");
  }
  if (points_per_class.size() != static_cast<std::size_t>(classes)) {
    throw Error(ErrorKind::InvalidSpec, "points_per_class must have one entry per class");
  }
  for (std::size_t count : points_per_class) {
    if (count < 1) throw Error(ErrorKind::InvalidSpec, "every class needs at least one point");
  }
  if (!centers.allFinite() || !sigmas.allFinite()) throw Error(ErrorKind::InvalidSpec, "non-finite parameter");
  if ((sigmas.array() < 0.0).any()) throw Error(ErrorKind::InvalidSpec, "negative sigma");
}

LabeledDataset generate_clusters(const ClusterSpec &spec) {
  spec.validate();
  const auto dims = spec.centers.cols();
  const std::size_t total = std::accumulate(spec.points_per_class.begin(), spec.points_per_class.end(), std::size_t{0});

  LabeledDataset data;
  data.points.resize(static_cast<Eigen::Index>(total), dims);
  data.labels.reserve(total);
  Rng rng(spec.seed);
  Eigen::Index row = 0;
  for (Eigen::Index k = 0; k < spec.centers.rows(); ++k) {
    const auto sigma_row = spec.sigmas.rows() == 1 ? 0 : k;
    for (std::size_t p = 0; p < spec.points_per_class[static_cast<std::size_t>(k)]; ++p, ++row) {
      for (Eigen::Index d = 0; d < dims; ++d) {
        data.points(row, d) = spec.centers(k, d) + spec.sigmas(sigma_row, d) * rng.normal();
      }
      data.labels.push_back(static_cast<Label>(k));
    }
  }
  return data;
}

ClusterSpec two_cluster_spec(double sigma, std::size_t points_per_class, std::uint64_t seed) {
  ClusterSpec spec;
  spec.centers.resize(2, 2);
  spec.centers << 0.0, 0.0, 1.0, 1.0;
  spec.sigmas = Matrix::Constant(1, 2, sigma);
  spec.points_per_class = {points_per_class, points_per_class};
  spec.seed = seed;
  return spec;
}

LabeledDataset embed_duplicate_y(const LabeledDataset &data) {
  if (data.dim() != 2) {
    throw Error(ErrorKind::WrongDimension, "expected 2-D input, got " + std::to_string(data.dim()) + "-D");
  }
  return embed_by_replication(data, 3);
}

LabeledDataset embed_by_replication(const LabeledDataset &data, std::size_t target_dim) {
  const std::size_t dims = data.dim();
  if (dims == 0 || target_dim < dims) {
    throw Error(ErrorKind::WrongDimension, "target dimension must be at least the input dimension");
  }
  LabeledDataset out;
  out.labels = data.labels;
  out.class_names = data.class_names;
  out.points.resize(data.points.rows(), static_cast<Eigen::Index>(target_dim));
  out.points.leftCols(static_cast<Eigen::Index>(dims)) = data.points;
  for (std::size_t k = 0; dims + k < target_dim; ++k) {
    const std::size_t source = dims - 1 - (k % dims);
    out.points.col(static_cast<Eigen::Index>(dims + k)) = data.points.col(static_cast<Eigen::Index>(source));
  }
  return out;
}

LabeledDataset duplicate_all_coordinates(const LabeledDataset &data) {
  LabeledDataset out;
  out.labels = data.labels;
  out.class_names = data.class_names;
  out.points.resize(data.points.rows(), 2 * data.points.cols());
  out.points << data.points, data.points;
  return out;
}

SeparationProbe probe_two_sigma_separation(std::size_t dim, std::size_t points_per_class, std::uint64_t seed) {
  if (dim < 1 || points_per_class < 2) throw Error(ErrorKind::InvalidSpec, "probe needs dim >= 1 and 2 points per class");
  // Both classes centred at the origin; the offset is added along axis 0.
  ClusterSpec spec;
  spec.centers = Matrix::Zero(2, static_cast<Eigen::Index>(dim));
  spec.sigmas = Matrix::Ones(1, static_cast<Eigen::Index>(dim));
  spec.points_per_class = {points_per_class, points_per_class};
  spec.seed = seed;
  const LabeledDataset base = generate_clusters(spec);
  const auto n = static_cast<Eigen::Index>(points_per_class);

  auto shifted = [&](double offset) {
    LabeledDataset data = base;
    data.points.col(0).tail(n).array() += offset;
    return data;
  };
  auto mean_pair_distance = [&](double offset) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = n; j < 2 * n; ++j) {
        auto diff = base.points.row(j) - base.points.row(i);
        double sq = (diff.tail(diff.size() - 1)).squaredNorm();
        const double d0 = diff(0) + offset;
        sum += std::sqrt(sq + d0 * d0);
      }
    }
    return sum / static_cast<double>(n * n);
  };

  SeparationProbe probe;
  probe.dim = dim;
  probe.gdv_center_reading = compute_gdv(shifted(2.0)).gdv;
  if (mean_pair_distance(0.0) >= 2.0) {
    probe.gdv_pair_reading = std::numeric_limits<double>::quiet_NaN();
    probe.pair_reading_offset = std::numeric_limits<double>::quiet_NaN();
    return probe;
  }
  double lo = 0.0, hi = 2.0;
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (mean_pair_distance(mid) < 2.0 ? lo : hi) = mid;
  }
  probe.pair_reading_offset = 0.5 * (lo + hi);
  probe.gdv_pair_reading = compute_gdv(shifted(probe.pair_reading_offset)).gdv;
  return probe;
}

std::string_view to_string(SigmaMode mode) {
  return mode == SigmaMode::PerClass ? "per_class" : "shared";
}

std::string_view to_string(SizeMode mode) {
  return mode == SizeMode::PerClass ? "per_class" : "per_dataset";
}

void EnsembleConfig::validate() const {
  if (n_datasets < 1) throw Error(ErrorKind::InvalidSpec, "n_datasets must be at least 1");
  auto check_int = [](const IntRange &r, std::uint64_t min, const char *name) {
    if (r.lo > r.hi || r.lo < min) {
      throw Error(ErrorKind::InvalidSpec, std::string(name) + " range is empty or below " + std::to_string(min));
    }
  };
  check_int(dim_range, 1, "dim");
  check_int(class_range, 1, "class");
  check_int(points_range, 1, "points");
  auto check_real = [](const RealRange &r, const char *name) {
    if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
      throw Error(ErrorKind::InvalidSpec, std::string(name) + " range is empty");
    }
  };
  check_real(center_range, "center");
  check_real(sigma_range, "sigma");
  if (sigma_range.lo < 0.0) throw Error(ErrorKind::InvalidSpec, "sigma range must be non-negative");
}

Ensemble::Ensemble(EnsembleConfig config) : config_(config) { config_.validate(); }

EnsembleMember Ensemble::at(std::size_t index) const {
  if (index >= config_.n_datasets) throw Error(ErrorKind::InvalidInput, "ensemble index out of range");
  Rng rng(config_.seed, static_cast<std::uint64_t>(index) + 1);

  const auto dims = static_cast<Eigen::Index>(rng.uniform_int(config_.dim_range.lo, config_.dim_range.hi));
  const auto classes = static_cast<Eigen::Index>(rng.uniform_int(config_.class_range.lo, config_.class_range.hi));

  ClusterSpec spec;
  spec.points_per_class.resize(static_cast<std::size_t>(classes));
  if (config_.size_mode == SizeMode::PerDataset) {
    const auto count = static_cast<std::size_t>(rng.uniform_int(config_.points_range.lo, config_.points_range.hi));
    std::fill(spec.points_per_class.begin(), spec.points_per_class.end(), count);
  } else {
    for (auto &count : spec.points_per_class) {
      count = static_cast<std::size_t>(rng.uniform_int(config_.points_range.lo, config_.points_range.hi));
    }
  }
  spec.centers.resize(classes, dims);
  for (Eigen::Index k = 0; k < classes; ++k) {
    for (Eigen::Index d = 0; d < dims; ++d) {
      spec.centers(k, d) = rng.uniform(config_.center_range.lo, config_.center_range.hi);
    }
  }
  spec.sigmas.resize(config_.sigma_mode == SigmaMode::PerClass ? classes : 1, dims);
  for (Eigen::Index k = 0; k < spec.sigmas.rows(); ++k) {
    for (Eigen::Index d = 0; d < dims; ++d) {
      spec.sigmas(k, d) = rng.uniform(config_.sigma_range.lo, config_.sigma_range.hi);
    }
  }
  spec.seed = rng.next_u64();

  EnsembleMember member;
  member.index = index;
  member.data = generate_clusters(spec);
  for (std::size_t count : spec.points_per_class) member.has_small_class |= count < 2;
  return member;
}

}  // namespace gdv
