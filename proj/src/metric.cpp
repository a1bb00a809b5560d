#include "gdv/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parallel.hpp"

namespace gdv {
namespace {

// Four independent accumulators; the summation order is fixed, so results do
// not depend on the caller.
inline double euclidean(const double *a, const double *b, std::size_t dim) noexcept {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t d = 0;
  for (; d + 4 <= dim; d += 4) {
    for (std::size_t k = 0; k < 4; ++k) {
      const double diff = a[d + k] - b[d + k];
      acc[k] += diff * diff;
    }
  }
  for (; d < dim; ++d) {
    const double diff = a[d] - b[d];
    acc[0] += diff * diff;
  }
  return std::sqrt((acc[0] + acc[1]) + (acc[2] + acc[3]));
}

Matrix gather(const ScaledDataset &scaled, std::span<const std::size_t> members) {
  Matrix block(static_cast<Eigen::Index>(members.size()), scaled.points.cols());
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i] >= static_cast<std::size_t>(scaled.points.rows())) {
      throw Error(ErrorKind::InvalidInput, "member index out of range");
    }
    block.row(static_cast<Eigen::Index>(i)) = scaled.points.row(static_cast<Eigen::Index>(members[i]));
  }
  return block;
}

double ordered_sum(const std::vector<double> &values) {
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

/// Sum in ascending value order, so the result does not depend on which class
/// carries which id.
double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return ordered_sum(values);
}

/// Columns reordered lexicographically by their values. Distances are then
/// accumulated in an order that does not depend on the input column order.
Matrix canonical_columns(const Matrix &points) {
  const Eigen::MatrixXd columns = points;  // column-major copy
  std::vector<Eigen::Index> order(static_cast<std::size_t>(points.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto rows = points.rows();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double *ca = columns.data() + a * rows;
    const double *cb = columns.data() + b * rows;
    return std::lexicographical_compare(ca, ca + rows, cb, cb + rows);
  });
  Matrix out(rows, points.cols());
  for (std::size_t k = 0; k < order.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = columns.col(order[k]);
  return out;
}

}  // namespace

std::string_view metric_name(DistanceMetric metric) {
  switch (metric) {
    case DistanceMetric::Euclidean: return "euclidean";
  }
  return "unknown";
}

DistanceMetric parse_metric(std::string_view name) {
  if (name == "euclidean" || name == "l2") return DistanceMetric::Euclidean;
  throw Error(ErrorKind::InvalidSpec, "unknown distance metric '" + std::string(name) + "'");
}

ScaledDataset z_score_half(const LabeledDataset &data) {
  data.validate();
  const auto n = data.points.rows();
  const auto dims = static_cast<std::size_t>(data.points.cols());

  ScaledDataset out;
  out.per_dim_mean.assign(dims, 0.0);
  out.per_dim_std.assign(dims, 0.0);
  for (std::size_t d = 0; d < dims; ++d) {
    const auto column = data.points.col(static_cast<Eigen::Index>(d));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) sum += column(i);
    const double mean = sum / static_cast<double>(n);
    out.per_dim_mean[d] = mean;
    if (column.minCoeff() == column.maxCoeff()) {
      out.dropped_dims.push_back(d);
      continue;
    }
    double sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) sq += (column(i) - mean) * (column(i) - mean);
    const double sigma = std::sqrt(sq / static_cast<double>(n));
    if (!(sigma > 0.0)) {
      out.dropped_dims.push_back(d);
      continue;
    }
    out.per_dim_std[d] = sigma;
    out.kept_dims.push_back(d);
  }
  if (out.kept_dims.empty()) {
    throw Error(ErrorKind::AllDimensionsConstant, "all " + std::to_string(dims) + " dimensions are constant");
  }

  out.points.resize(n, static_cast<Eigen::Index>(out.kept_dims.size()));
  for (std::size_t k = 0; k < out.kept_dims.size(); ++k) {
    const std::size_t d = out.kept_dims[k];
    const double mean = out.per_dim_mean[d];
    const double sigma = out.per_dim_std[d];
    for (Eigen::Index i = 0; i < n; ++i) {
      out.points(i, static_cast<Eigen::Index>(k)) = 0.5 * (data.points(i, static_cast<Eigen::Index>(d)) - mean) / sigma;
    }
  }
  return out;
}

double mean_intra_class_distance(const ScaledDataset &scaled, std::span<const std::size_t> members,
                                 const GdvOptions &options) {
  const std::size_t count = members.size();
  if (count < 2) {
    throw Error(ErrorKind::ClassTooSmall, "class has " + std::to_string(count) + " point(s), needs 2");
  }
  const Matrix block = gather(scaled, members);
  const std::size_t dim = static_cast<std::size_t>(block.cols());
  const double *base = block.data();

  std::vector<double> row_sums(count - 1, 0.0);
  detail::parallel_for(count - 1, options.threads, [&](std::size_t i) {
    const double *a = base + i * dim;
    double sum = 0.0;
    for (std::size_t j = i + 1; j < count; ++j) sum += euclidean(a, base + j * dim, dim);
    row_sums[i] = sum;
  });
  const double pairs = 0.5 * static_cast<double>(count) * static_cast<double>(count - 1);
  return ordered_sum(row_sums) / pairs;
}

double mean_inter_class_distance(const ScaledDataset &scaled, std::span<const std::size_t> members_l,
                                 std::span<const std::size_t> members_m, const GdvOptions &options) {
  if (members_l.empty() || members_m.empty()) {
    throw Error(ErrorKind::EmptyClass, "inter-class distance needs two non-empty classes");
  }
  const Matrix left = gather(scaled, members_l);
  const Matrix right = gather(scaled, members_m);
  const std::size_t dim = static_cast<std::size_t>(left.cols());
  const std::size_t n_left = members_l.size();
  const std::size_t n_right = members_m.size();

  std::vector<double> row_sums(n_left, 0.0);
  detail::parallel_for(n_left, options.threads, [&](std::size_t i) {
    const double *a = left.data() + i * dim;
    double sum = 0.0;
    for (std::size_t j = 0; j < n_right; ++j) sum += euclidean(a, right.data() + j * dim, dim);
    row_sums[i] = sum;
  });
  return ordered_sum(row_sums) / (static_cast<double>(n_left) * static_cast<double>(n_right));
}

double recompute_gdv(const GdvReport &report) {
  const double n_classes = static_cast<double>(report.intra.size());
  std::vector<double> intra_values, inter_values;
  for (const auto &[label, value] : report.intra) intra_values.push_back(value);
  for (const auto &[pair, value] : report.inter) inter_values.push_back(value);
  const double intra = sorted_sum(std::move(intra_values));
  const double inter = sorted_sum(std::move(inter_values));
  const double mean_intra = intra / n_classes;
  const double mean_inter = 2.0 * inter / (n_classes * (n_classes - 1.0));
  return (mean_intra - mean_inter) / std::sqrt(static_cast<double>(report.effective_dim));
}

namespace {

void check_label_structure(const std::map<Label, std::vector<std::size_t>> &members) {
  if (members.size() < 2) {
    throw Error(ErrorKind::SingleClass, "found " + std::to_string(members.size()) + " distinct label(s), need 2");
  }
  for (const auto &[label, rows] : members) {
    if (rows.size() < 2) {
      throw Error(ErrorKind::ClassTooSmall,
                  "class " + std::to_string(label) + " has " + std::to_string(rows.size()) + " point(s)");
    }
  }
}

}  // namespace

GdvReport compute_gdv(const LabeledDataset &data, const GdvOptions &options) {
  data.validate();
  const auto members = class_members(data.labels);
  check_label_structure(members);
  ScaledDataset scaled = z_score_half(data);
  scaled.points = canonical_columns(scaled.points);

  GdvReport report;
  report.metric_name = std::string(metric_name(options.metric));
  report.effective_dim = scaled.effective_dim();
  report.n_classes = members.size();
  for (const auto &[label, rows] : members) {
    report.class_counts[label] = rows.size();
    report.intra[label] = mean_intra_class_distance(scaled, rows, options);
  }
  for (auto l = members.begin(); l != members.end(); ++l) {
    for (auto m = std::next(l); m != members.end(); ++m) {
      // The class holding the lower row index is the outer loop.
      const bool l_first = l->second.front() < m->second.front();
      report.inter[ClassPair{l->first, m->first}] =
          l_first ? mean_inter_class_distance(scaled, l->second, m->second, options)
                  : mean_inter_class_distance(scaled, m->second, l->second, options);
    }
  }
  report.gdv = recompute_gdv(report);
  return report;
}

GdvCurve gdv_curve(std::span<const LayerData> layers, const GdvOptions &options) {
  if (layers.empty()) throw Error(ErrorKind::InvalidInput, "curve needs at least one layer");
  const auto &labels = layers.front().data.labels;
  for (const auto &layer : layers) {
    if (layer.data.labels != labels) {
      throw Error(ErrorKind::LabelMismatch, "layer '" + layer.layer_id + "' carries a different label vector");
    }
  }
  check_label_structure(class_members(labels));

  GdvCurve curve;
  curve.points.reserve(layers.size());
  for (const auto &layer : layers) {
    CurvePoint point{layer.layer_id, std::nullopt, std::nullopt};
    try {
      point.gdv = compute_gdv(layer.data, options).gdv;
    } catch (const Error &e) {
      point.failure = e.kind();
    }
    curve.points.push_back(std::move(point));
  }
  return curve;
}

}  // namespace gdv
