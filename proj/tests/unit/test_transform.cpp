#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "generators.hpp"
#include "gdv/error.hpp"
#include "gdv/metric.hpp"
#include "gdv/transform.hpp"

using namespace gdv;

namespace {

ErrorKind kind_of(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::IoError;
}

}  // namespace

TEST_SUITE("transform_lab") {
  TEST_CASE("identity matrix leaves the data and the GDV unchanged") {
    Rng rng(1);
    const auto data = testing::random_dataset(rng);
    const auto out = apply_matrix(data, Matrix::Identity(static_cast<Eigen::Index>(data.dim()),
                                                         static_cast<Eigen::Index>(data.dim())),
                                  false);
    CHECK(out.points == data.points);
    CHECK(compute_gdv(out).gdv - compute_gdv(data).gdv == 0.0);
  }

  TEST_CASE("logistic of zero is one half") {
    CHECK(logistic(0.0) == 0.5);
    const auto zeros = make_dataset(Matrix::Zero(4, 3), {0, 0, 1, 1});
    const auto out = apply_matrix(zeros, Matrix::Identity(3, 3), true);
    CHECK((out.points.array() == 0.5).all());
    TransformSpec spec;
    spec.kind = TransformKind::ScaleLogistic;
    CHECK((apply_transform(zeros, spec).points.array() == 0.5).all());
  }

  TEST_CASE("output shapes") {
    Rng rng(2);
    const auto data = make_dataset(Matrix::Random(10, 3), {0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
    for (TransformKind kind : kAllTransformKinds) {
      TransformSpec spec;
      spec.kind = kind;
      const bool doubled = kind == TransformKind::RandomLinearDoubleDim ||
                           kind == TransformKind::RandomLinearDoubleDimLogistic;
      const auto out = apply_transform(data, spec);
      CHECK(out.dim() == (doubled ? 6u : 3u));
      CHECK(out.size() == data.size());
      CHECK(out.labels == data.labels);
    }
  }

  TEST_CASE("apply_transform matches an explicitly drawn matrix") {
    Rng data_rng(3);
    const auto data = testing::random_dataset(data_rng);
    TransformSpec spec;
    spec.kind = TransformKind::RandomLinearDoubleDimLogistic;
    spec.seed = 99;
    Rng rng(99);
    const auto d = static_cast<Eigen::Index>(data.dim());
    Matrix a(2 * d, d);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = -10.0 + 20.0 * rng.uniform();
    }
    const auto out = apply_transform(data, spec);
    for (Eigen::Index n = 0; n < data.points.rows(); ++n) {
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        double z = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) z += a(i, j) * data.points(n, j);
        CHECK(out.points(n, i) == doctest::Approx(1.0 / (1.0 + std::exp(-z))).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("scale_logistic multiplies then squashes") {
    const auto data = make_dataset((Matrix(2, 1) << 0.1, -0.2).finished(), {0, 1});
    TransformSpec spec;
    spec.kind = TransformKind::ScaleLogistic;
    const auto out = apply_transform(data, spec);
    CHECK(out.points(0, 0) == doctest::Approx(logistic(1.0)));
    CHECK(out.points(1, 0) == doctest::Approx(logistic(-2.0)));
  }

  TEST_CASE("half-z frame transforms the scaled coordinates") {
    Rng rng(4);
    const auto data = testing::random_dataset(rng);
    TransformSpec spec;
    spec.kind = TransformKind::ScaleLogistic;
    spec.frame = InputFrame::HalfZScored;
    const auto scaled = z_score_half(data).points;
    const auto out = apply_transform(data, spec);
    CHECK(out.points(0, 0) == doctest::Approx(logistic(10.0 * scaled(0, 0))));
  }

  TEST_CASE("specs and kinds") {
    TransformSpec spec;
    spec.element_range = {1.0, 1.0};
    CHECK(kind_of([&] { spec.validate(); }) == ErrorKind::InvalidSpec);
    for (TransformKind kind : kAllTransformKinds) CHECK(parse_transform_kind(to_string(kind)) == kind);
    CHECK(kind_of([] { parse_transform_kind("rotate"); }) == ErrorKind::InvalidSpec);
    const auto data = make_dataset(Matrix::Zero(2, 2), {0, 1});
    CHECK(kind_of([&] { apply_matrix(data, Matrix::Identity(3, 3), false); }) == ErrorKind::ShapeMismatch);
  }

  TEST_CASE("histogram binning") {
    Histogram h;
    CHECK(h.bins() == 61);
    CHECK(h.bin_center(30) == doctest::Approx(0.0));
    CHECK(h.bin_center(0) == doctest::Approx(-0.15 + 0.15 / 61.0));
    h.add(-5.0);
    h.add(5.0);
    h.add(0.0);
    h.add(0.15);
    CHECK(h.counts()[0] == 1);
    CHECK(h.counts()[60] == 2);
    CHECK(h.counts()[30] == 1);
    CHECK(h.total() == 4);
    CHECK(kind_of([] { Histogram(1.0, 0.0, 3); }) == ErrorKind::InvalidSpec);
  }

  TEST_CASE("total variation") {
    Histogram a, b, c;
    a.add(0.0);
    b.add(0.0);
    b.add(0.0);
    c.add(0.1);
    CHECK(total_variation(a, b) == 0.0);
    CHECK(total_variation(a, c) == 1.0);
    Histogram other(-1.0, 1.0, 61);
    other.add(0.0);
    CHECK(kind_of([&] { total_variation(a, other); }) == ErrorKind::InvalidInput);
  }

  TEST_CASE("delta statistics agree with a member-by-member recomputation") {
    EnsembleConfig cfg;
    cfg.n_datasets = 60;
    cfg.seed = 12;
    DeltaOptions options;
    options.transform_seed = 5;
    const auto stats = delta_gdv_experiment(cfg, TransformKind::RandomLinearLogistic, 60, options);
    CHECK(stats.n_valid + stats.n_skipped == 60);
    CHECK(stats.histogram.total() == stats.n_valid);

    const Ensemble ensemble(cfg);
    double sum = 0.0;
    std::size_t valid = 0;
    for (std::size_t k = 0; k < 60; ++k) {
      const auto member = ensemble.at(k);
      if (member.has_small_class) continue;
      TransformSpec spec;
      spec.kind = TransformKind::RandomLinearLogistic;
      spec.frame = InputFrame::HalfZScored;
      spec.seed = derive_seed(derive_seed(5, static_cast<std::uint64_t>(TransformKind::RandomLinearLogistic) + 1), k + 1);
      sum += compute_gdv(apply_transform(member.data, spec)).gdv - compute_gdv(member.data).gdv;
      ++valid;
    }
    CHECK(valid == stats.n_valid);
    CHECK(stats.mean_delta == doctest::Approx(sum / static_cast<double>(valid)).epsilon(1e-12));
  }

  TEST_CASE("adding kinds does not change another kind's draws") {
    EnsembleConfig cfg;
    cfg.n_datasets = 30;
    const TransformKind one[] = {TransformKind::RandomLinear};
    const auto alone = delta_gdv_experiments(cfg, one);
    const auto all = delta_gdv_experiments(cfg, kAllTransformKinds);
    CHECK(alone.front().mean_delta == all.front().mean_delta);
    CHECK(alone.front().histogram.counts() == all.front().histogram.counts());
  }

  TEST_CASE("thread count does not change the statistics") {
    EnsembleConfig cfg;
    cfg.n_datasets = 40;
    DeltaOptions one, four;
    four.threads = 4;
    const auto a = delta_gdv_experiment(cfg, TransformKind::ScaleLogistic, 40, one);
    const auto b = delta_gdv_experiment(cfg, TransformKind::ScaleLogistic, 40, four);
    CHECK(a.mean_delta == b.mean_delta);
    CHECK(ensemble_gdv(cfg, 1).mean_gdv == ensemble_gdv(cfg, 3).mean_gdv);
  }

  TEST_CASE("labels are never altered") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
      const auto data = testing::random_dataset(rng);
      for (TransformKind kind : kAllTransformKinds) {
        TransformSpec spec;
        spec.kind = kind;
        spec.seed = rng.next_u64();
        spec.frame = trial % 2 ? InputFrame::Raw : InputFrame::HalfZScored;
        CHECK(apply_transform(data, spec).labels == data.labels);
      }
    }
  }

  TEST_CASE("full-size ensemble reproduces the reported means") {
    EnsembleConfig cfg;
    cfg.n_datasets = 10000;
    const auto base = ensemble_gdv(cfg);
    CHECK(std::abs(base.mean_gdv + 0.115) < 0.01);
    CHECK(base.n_valid + base.n_skipped == 10000);
    CHECK(base.min_gdv < base.mean_gdv);
    CHECK(base.max_gdv > base.mean_gdv);
    const auto supported = std::count_if(base.values.begin(), base.values.end(),
                                         [](double g) { return g >= -0.4 && g <= 0.0; });
    CAPTURE(supported);
    CHECK(static_cast<double>(supported) > 0.95 * static_cast<double>(base.n_valid));

    const TransformKind kinds[] = {TransformKind::RandomLinear, TransformKind::RandomLinearLogistic,
                                   TransformKind::ScaleLogistic};
    const auto stats = delta_gdv_experiments(cfg, kinds);
    CHECK(std::abs(stats[0].mean_delta - 0.008) < 0.004);
    CHECK(std::abs(stats[1].mean_delta - 0.011) < 0.004);
    CHECK(std::abs(stats[2].mean_delta + 0.031) < 0.008);
    // Most of the random-linear mass lies within +-0.1.
    std::size_t inside = 0;
    for (std::size_t b = 0; b < stats[0].histogram.bins(); ++b) {
      if (std::abs(stats[0].histogram.bin_center(b)) < 0.1) inside += stats[0].histogram.counts()[b];
    }
    CHECK(static_cast<double>(inside) / static_cast<double>(stats[0].n_valid) > 0.95);
  }
}
