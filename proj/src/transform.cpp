#include "gdv/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "gdv/error.hpp"
#include "gdv/metric.hpp"
#include "gdv/random.hpp"
#include "parallel.hpp"

namespace gdv {

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::RandomLinear: return "random_linear";
    case TransformKind::RandomLinearLogistic: return "random_linear_logistic";
    case TransformKind::RandomLinearDoubleDim: return "random_linear_double_dim";
    case TransformKind::RandomLinearDoubleDimLogistic: return "random_linear_double_dim_logistic";
    case TransformKind::ScaleLogistic: return "scale_logistic";
  }
  return "unknown";
}

TransformKind parse_transform_kind(std::string_view name) {
  for (TransformKind kind : kAllTransformKinds) {
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorKind::InvalidSpec, "unknown transform kind '" + std::string(name) + "'");
}

std::string_view to_string(InputFrame frame) {
  return frame == InputFrame::Raw ? "raw" : "half_z";
}

void TransformSpec::validate() const {
  if (!(element_range.lo < element_range.hi)) throw Error(ErrorKind::InvalidSpec, "element range must satisfy lo < hi");
  if (!std::isfinite(scale_factor)) throw Error(ErrorKind::InvalidSpec, "scale factor must be finite");
}

double logistic(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

LabeledDataset apply_matrix(const LabeledDataset &data, const Matrix &matrix, bool with_logistic) {
  if (matrix.cols() != data.points.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "matrix has " + std::to_string(matrix.cols()) + " columns, data has " +
                                              std::to_string(data.points.cols()) + " dimensions");
  }
  LabeledDataset out;
  out.labels = data.labels;
  out.class_names = data.class_names;
  out.points = data.points * matrix.transpose();
  if (with_logistic) out.points = out.points.unaryExpr([](double v) { return logistic(v); });
  return out;
}

namespace {

LabeledDataset to_frame(const LabeledDataset &data, InputFrame frame) {
  if (frame == InputFrame::Raw) return data;
  LabeledDataset out;
  out.points = z_score_half(data).points;
  out.labels = data.labels;
  out.class_names = data.class_names;
  return out;
}

}  // namespace

LabeledDataset apply_transform(const LabeledDataset &data, const TransformSpec &spec) {
  spec.validate();
  data.validate();
  const LabeledDataset input = to_frame(data, spec.frame);
  const auto dims = input.points.cols();

  if (spec.kind == TransformKind::ScaleLogistic) {
    LabeledDataset out = input;
    out.points = input.points.unaryExpr([&](double v) { return logistic(spec.scale_factor * v); });
    return out;
  }

  const bool doubled = spec.kind == TransformKind::RandomLinearDoubleDim ||
                       spec.kind == TransformKind::RandomLinearDoubleDimLogistic;
  const bool with_logistic = spec.kind == TransformKind::RandomLinearLogistic ||
                             spec.kind == TransformKind::RandomLinearDoubleDimLogistic;
  Rng rng(spec.seed);
  Matrix matrix(doubled ? 2 * dims : dims, dims);
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      matrix(i, j) = rng.uniform(spec.element_range.lo, spec.element_range.hi);
    }
  }
  return apply_matrix(input, matrix, with_logistic);
}

Histogram::Histogram(double lo, double hi, std::size_t bins) : lo_(lo), hi_(hi), counts_(bins, 0) {
  if (!(lo < hi) || bins == 0) throw Error(ErrorKind::InvalidSpec, "histogram needs lo < hi and at least one bin");
}

void Histogram::add(double value) {
  const double position = (value - lo_) / (hi_ - lo_) * static_cast<double>(counts_.size());
  std::size_t bin = 0;
  if (position >= static_cast<double>(counts_.size())) {
    bin = counts_.size() - 1;
  } else if (position > 0.0) {
    bin = static_cast<std::size_t>(position);
  }
  ++counts_[bin];
  ++total_;
}

double Histogram::bin_center(std::size_t bin) const {
  const double width = (hi_ - lo_) / static_cast<double>(counts_.size());
  return lo_ + (static_cast<double>(bin) + 0.5) * width;
}

double total_variation(const Histogram &a, const Histogram &b) {
  if (a.bins() != b.bins() || a.lo() != b.lo() || a.hi() != b.hi()) {
    throw Error(ErrorKind::InvalidInput, "histograms use different binning");
  }
  if (a.total() == 0 || b.total() == 0) throw Error(ErrorKind::InvalidInput, "empty histogram");
  double l1 = 0.0;
  for (std::size_t i = 0; i < a.bins(); ++i) {
    l1 += std::abs(static_cast<double>(a.counts()[i]) / static_cast<double>(a.total()) -
                   static_cast<double>(b.counts()[i]) / static_cast<double>(b.total()));
  }
  return 0.5 * l1;
}

namespace {

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    min = std::min(min, v);
    max = std::max(max, v);
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double stddev() const {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    return std::sqrt(std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0)));
  }
};

std::uint64_t kind_code(TransformKind kind) {
  return static_cast<std::uint64_t>(kind) + 1;
}

}  // namespace

EnsembleGdvStats ensemble_gdv(const EnsembleConfig &cfg, unsigned threads) {
  const Ensemble ensemble(cfg);
  EnsembleGdvStats stats;
  stats.values.assign(ensemble.size(), std::numeric_limits<double>::quiet_NaN());
  detail::parallel_for(ensemble.size(), threads, [&](std::size_t k) {
    const EnsembleMember member = ensemble.at(k);
    if (member.has_small_class) return;
    stats.values[k] = compute_gdv(member.data).gdv;
  });

  Moments moments;
  for (double v : stats.values) {
    if (std::isnan(v)) {
      ++stats.n_skipped;
      continue;
    }
    moments.add(v);
    stats.histogram.add(v);
  }
  stats.n_valid = moments.count;
  stats.mean_gdv = moments.mean();
  stats.stddev_gdv = moments.stddev();
  stats.min_gdv = moments.count ? moments.min : 0.0;
  stats.max_gdv = moments.count ? moments.max : 0.0;
  return stats;
}

std::vector<DeltaGdvStats> delta_gdv_experiments(const EnsembleConfig &cfg, std::span<const TransformKind> kinds,
                                                 const DeltaOptions &options) {
  const Ensemble ensemble(cfg);
  struct Outcome {
    bool small_class = false;
    double before = 0.0;
    std::vector<std::optional<double>> after;
  };
  std::vector<Outcome> outcomes(ensemble.size());

  detail::parallel_for(ensemble.size(), options.threads, [&](std::size_t k) {
    const EnsembleMember member = ensemble.at(k);
    Outcome &out = outcomes[k];
    if (member.has_small_class) {
      out.small_class = true;
      return;
    }
    out.before = compute_gdv(member.data).gdv;
    out.after.resize(kinds.size());
    for (std::size_t q = 0; q < kinds.size(); ++q) {
      TransformSpec spec;
      spec.kind = kinds[q];
      spec.frame = options.frame;
      spec.seed = derive_seed(derive_seed(options.transform_seed, kind_code(kinds[q])), k + 1);
      try {
        out.after[q] = compute_gdv(apply_transform(member.data, spec)).gdv;
      } catch (const Error &e) {
        if (e.kind() != ErrorKind::AllDimensionsConstant) throw;
      }
    }
  });

  std::vector<DeltaGdvStats> results(kinds.size());
  for (std::size_t q = 0; q < kinds.size(); ++q) {
    DeltaGdvStats &stats = results[q];
    stats.kind = kinds[q];
    stats.frame = options.frame;
    Moments before;
    Moments after;
    Moments delta;
    for (const Outcome &out : outcomes) {
      if (out.small_class) {
        ++stats.n_small_class;
        continue;
      }
      if (!out.after[q]) {
        ++stats.n_degenerate;
        continue;
      }
      const double d = *out.after[q] - out.before;
      before.add(out.before);
      after.add(*out.after[q]);
      delta.add(d);
      stats.histogram.add(d);
    }
    stats.n_valid = delta.count;
    stats.n_skipped = stats.n_small_class + stats.n_degenerate;
    stats.mean_before = before.mean();
    stats.mean_after = after.mean();
    stats.mean_delta = delta.mean();
    stats.stddev_delta = delta.stddev();
    stats.min_delta = delta.count ? delta.min : 0.0;
    stats.max_delta = delta.count ? delta.max : 0.0;
  }
  return results;
}

DeltaGdvStats delta_gdv_experiment(EnsembleConfig cfg, TransformKind kind, std::size_t n_datasets,
                                   const DeltaOptions &options) {
  cfg.n_datasets = n_datasets;
  const TransformKind kinds[] = {kind};
  return delta_gdv_experiments(cfg, kinds, options).front();
}

}  // namespace gdv
