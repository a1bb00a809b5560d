#include <doctest.h>

#include <cmath>

#include "gdv/error.hpp"
#include "gdv/metric.hpp"
#include "gdv/synthetic.hpp"

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

TEST_SUITE("synthetic_data") {
  TEST_CASE("separated spec") {
    const auto data = generate_clusters(two_cluster_spec(0.2, 500, 42));
    CHECK(data.size() == 1000);
    CHECK(data.dim() == 2);
    CHECK(std::abs(compute_gdv(data).gdv + 0.72) < 0.03);
  }

  TEST_CASE("zero sigma puts every point on its centre") {
    ClusterSpec spec = two_cluster_spec(0.0, 7, 1);
    const auto data = generate_clusters(spec);
    for (std::size_t i = 0; i < data.size(); ++i) {
      CHECK(data.points.row(static_cast<Eigen::Index>(i)) == spec.centers.row(data.labels[i]));
    }
  }

  TEST_CASE("generation is deterministic") {
    const auto a = generate_clusters(two_cluster_spec(0.3, 100, 5));
    const auto b = generate_clusters(two_cluster_spec(0.3, 100, 5));
    CHECK(a.points == b.points);
    CHECK(a.labels == b.labels);
    CHECK(generate_clusters(two_cluster_spec(0.3, 100, 6)).points != a.points);
  }

  TEST_CASE("per-class sigmas and label layout") {
    ClusterSpec spec;
    spec.centers = Matrix::Zero(3, 2);
    spec.sigmas = Matrix(3, 2);
    spec.sigmas << 0.0, 0.0, 1.0, 1.0, 0.0, 2.0;
    spec.points_per_class = {2, 3, 4};
    const auto data = generate_clusters(spec);
    CHECK(data.labels == std::vector<Label>{0, 0, 1, 1, 1, 2, 2, 2, 2});
    CHECK(data.points.row(0).norm() == 0.0);
    CHECK(data.points(5, 0) == 0.0);
    CHECK(data.points(5, 1) != 0.0);
  }

  TEST_CASE("invalid specs") {
    ClusterSpec spec = two_cluster_spec(0.2, 10, 1);
    spec.sigmas(0, 0) = -1.0;
    CHECK(kind_of([&] { spec.validate(); }) == ErrorKind::InvalidSpec);
    spec = two_cluster_spec(0.2, 10, 1);
    spec.points_per_class = {10, 0};
    CHECK(kind_of([&] { generate_clusters(spec); }) == ErrorKind::InvalidSpec);
    spec = two_cluster_spec(0.2, 10, 1);
    spec.points_per_class = {10};
    CHECK(kind_of([&] { generate_clusters(spec); }) == ErrorKind::InvalidSpec);
    spec = two_cluster_spec(0.2, 10, 1);
    spec.sigmas = Matrix::Ones(1, 3);
    CHECK(kind_of([&] { generate_clusters(spec); }) == ErrorKind::InvalidSpec);
  }

  TEST_CASE("embed_duplicate_y") {
    const auto data = make_dataset((Matrix(1, 2) << 1.0, 2.0).finished(), {0});
    const auto out = embed_duplicate_y(data);
    CHECK(out.points == (Matrix(1, 3) << 1.0, 2.0, 2.0).finished());
    CHECK(out.labels == data.labels);
    const auto flat = make_dataset((Matrix(2, 1) << 1.0, 2.0).finished(), {0, 1});
    CHECK(kind_of([&] { embed_duplicate_y(flat); }) == ErrorKind::WrongDimension);

    const auto fig = generate_clusters(two_cluster_spec(0.2, 500, 42));
    CHECK(std::abs(compute_gdv(embed_duplicate_y(fig)).gdv - compute_gdv(fig).gdv) < 0.02);
  }

  TEST_CASE("embedding by replication") {
    const auto data = make_dataset((Matrix(1, 2) << 1.0, 2.0).finished(), {0});
    CHECK(embed_by_replication(data, 5).points == (Matrix(1, 5) << 1.0, 2.0, 2.0, 1.0, 2.0).finished());
    CHECK(embed_by_replication(data, 2).points == data.points);
    CHECK(duplicate_all_coordinates(data).points == (Matrix(1, 4) << 1.0, 2.0, 1.0, 2.0).finished());

    const auto fig = generate_clusters(two_cluster_spec(0.2, 500, 42));
    const double base = compute_gdv(fig).gdv;
    for (std::size_t d = 3; d <= 20; ++d) CHECK(std::abs(compute_gdv(embed_by_replication(fig, d)).gdv - base) < 0.02);
  }

  TEST_CASE("ensemble with fixed sizes") {
    EnsembleConfig cfg;
    cfg.n_datasets = 1;
    cfg.dim_range = {2, 2};
    cfg.class_range = {2, 2};
    const Ensemble ensemble(cfg);
    CHECK(ensemble.size() == 1);
    const auto member = ensemble.at(0);
    CHECK(member.data.dim() == 2);
    CHECK(class_members(member.data.labels).size() == 2);
  }

  TEST_CASE("ensemble with singleton classes is flagged") {
    EnsembleConfig cfg;
    cfg.n_datasets = 20;
    cfg.points_range = {1, 1};
    const Ensemble ensemble(cfg);
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
      const auto member = ensemble.at(k);
      CHECK(member.has_small_class);
      CHECK(kind_of([&] { compute_gdv(member.data); }) == ErrorKind::ClassTooSmall);
    }
  }

  TEST_CASE("ensemble members are independent of generation order") {
    EnsembleConfig cfg;
    cfg.n_datasets = 10;
    const Ensemble a(cfg), b(cfg);
    const auto late = a.at(7);
    for (std::size_t k = 0; k < 7; ++k) b.at(k);
    const auto again = b.at(7);
    CHECK(late.data.points == again.data.points);
    CHECK(late.data.labels == again.data.labels);
  }

  TEST_CASE("ensemble ranges are honoured") {
    EnsembleConfig cfg;
    cfg.n_datasets = 200;
    const Ensemble ensemble(cfg);
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
      const auto m = ensemble.at(k);
      CHECK(m.data.dim() >= 2);
      CHECK(m.data.dim() <= 10);
      const auto classes = class_members(m.data.labels);
      CHECK(classes.size() >= 2);
      CHECK(classes.size() <= 10);
      bool small = false;
      for (const auto &[l, rows] : classes) {
        CHECK(rows.size() >= 1);
        CHECK(rows.size() <= 100);
        small = small || rows.size() < 2;
      }
      CHECK(small == m.has_small_class);
    }
  }

  TEST_CASE("invalid ensemble configs") {
    EnsembleConfig cfg;
    cfg.n_datasets = 0;
    CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::InvalidSpec);
    cfg = {};
    cfg.dim_range = {5, 2};
    CHECK(kind_of([&] { Ensemble{cfg}; }) == ErrorKind::InvalidSpec);
    cfg = {};
    cfg.sigma_range = {-1.0, 1.0};
    CHECK(kind_of([&] { Ensemble{cfg}; }) == ErrorKind::InvalidSpec);
  }

  TEST_CASE("property: sample means converge to the centre") {
    ClusterSpec spec;
    spec.centers = (Matrix(1, 3) << 0.5, -2.0, 10.0).finished();
    spec.sigmas = (Matrix(1, 3) << 0.1, 1.0, 3.0).finished();
    spec.points_per_class = {20000};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      spec.seed = seed;
      const auto data = generate_clusters(spec);
      for (Eigen::Index d = 0; d < 3; ++d) {
        const double mean = data.points.col(d).mean();
        CHECK(std::abs(mean - spec.centers(0, d)) < 3.0 * spec.sigmas(0, d) / std::sqrt(20000.0));
      }
    }
  }

  TEST_CASE("two-sigma separation probe") {
    const auto p1 = probe_two_sigma_separation(1, 300, 1);
    CHECK(p1.gdv_center_reading < 0.0);
    CHECK(std::isfinite(p1.gdv_pair_reading));
    CHECK(p1.pair_reading_offset > 0.0);
    CHECK(p1.pair_reading_offset < 2.0);
    const auto p3 = probe_two_sigma_separation(3, 300, 1);
    CHECK(std::isnan(p3.gdv_pair_reading));
    CHECK(kind_of([] { probe_two_sigma_separation(0, 10, 1); }) == ErrorKind::InvalidSpec);
  }
}
