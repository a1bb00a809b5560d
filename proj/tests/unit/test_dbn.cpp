#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gdv/dbn.hpp"
#include "gdv/error.hpp"
#include "gdv/io.hpp"
#include "gdv/metric.hpp"
#include "gdv/random.hpp"

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

const LabeledDataset &mnist() {
  static const LabeledDataset data = load_idx_dataset(GDV_DATA_DIR "/mnist10k-images-idx3-ubyte",
                                                      GDV_DATA_DIR "/mnist10k-labels-idx1-ubyte");
  return data;
}

RbmParams zero_rbm(std::size_t visible, std::size_t hidden) {
  return {Matrix::Zero(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(visible)),
          Vector::Zero(static_cast<Eigen::Index>(visible)), Vector::Zero(static_cast<Eigen::Index>(hidden))};
}

Matrix random_unit(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
  return m;
}

}  // namespace

TEST_SUITE("dbn") {
  TEST_CASE("zero parameters give one half everywhere") {
    const RbmParams rbm = zero_rbm(6, 4);
    const Matrix v = random_unit(5, 6, 1);
    CHECK((rbm_hidden_probabilities(rbm, v).array() == 0.5).all());
    CHECK((rbm_visible_probabilities(rbm, Matrix::Ones(3, 4)).array() == 0.5).all());

    DbnModel model;
    model.layers = {zero_rbm(6, 5), zero_rbm(5, 3)};
    CHECK((dbn_propagate(model, v, 2).array() == 0.5).all());
  }

  TEST_CASE("total input is linear in the inputs") {
    RbmParams rbm = rbm_init(7, 5, 0.3, 2);
    const Matrix v = random_unit(4, 7, 3);
    CHECK(rbm_hidden_input(rbm, 2.0 * v) == 2.0 * rbm_hidden_input(rbm, v));
    Rng rng(4);
    for (Eigen::Index i = 0; i < rbm.hidden_bias.size(); ++i) rbm.hidden_bias(i) = rng.normal();
    Matrix z1 = rbm_hidden_input(rbm, v), z2 = rbm_hidden_input(rbm, 2.0 * v);
    z1.rowwise() -= rbm.hidden_bias.transpose();
    z2.rowwise() -= rbm.hidden_bias.transpose();
    CHECK((z2 - 2.0 * z1).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("hidden input matches the explicit sum") {
    RbmParams rbm = rbm_init(5, 3, 0.5, 6);
    rbm.hidden_bias << 0.1, -0.2, 0.3;
    const Matrix v = random_unit(2, 5, 7);
    const Matrix z = rbm_hidden_input(rbm, v);
    for (Eigen::Index n = 0; n < 2; ++n) {
      for (Eigen::Index i = 0; i < 3; ++i) {
        double sum = rbm.hidden_bias(i);
        for (Eigen::Index j = 0; j < 5; ++j) sum += rbm.weights(i, j) * v(n, j);
        CHECK(z(n, i) == doctest::Approx(sum).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("initialization statistics") {
    const RbmParams rbm = rbm_init(200, 100, 0.01, 8);
    const double n = static_cast<double>(rbm.weights.size());
    const double mean = rbm.weights.sum() / n;
    const double sd = std::sqrt((rbm.weights.array() - mean).square().sum() / n);
    CHECK(std::abs(mean) < 0.001);
    CHECK(std::abs(sd - 0.01) < 0.0005);
    CHECK(rbm.visible_bias.isZero());
    CHECK(rbm.hidden_bias.isZero());
  }

  TEST_CASE("zero epochs keep the initialization") {
    RbmTrainConfig config;
    config.epochs = 0;
    config.seed = 9;
    const auto trained = rbm_train_cd(6, 4, random_unit(10, 6, 1), config);
    const RbmParams init = rbm_init(6, 4, config.init_stddev, derive_seed(9, 1));
    CHECK(trained.params.weights == init.weights);
    CHECK(trained.params.visible_bias == init.visible_bias);
    CHECK(trained.params.hidden_bias == init.hidden_bias);
  }

  TEST_CASE("reconstruction of a single repeated pattern improves") {
    Matrix data(50, 12);
    for (Eigen::Index c = 0; c < 12; ++c) data.col(c).setConstant(c % 3 == 0 ? 1.0 : 0.0);
    RbmTrainConfig config;
    config.epochs = 10;
    config.learning_rate = 0.05;
    config.batch_size = 10;
    config.track_reconstruction = true;
    config.seed = 3;
    const auto trained = rbm_train_cd(12, 8, data, config);
    const auto &err = trained.reconstruction_error;
    REQUIRE(err.size() == 10);
    std::vector<double> smooth;
    for (std::size_t e = 0; e + 2 < err.size(); ++e) smooth.push_back((err[e] + err[e + 1] + err[e + 2]) / 3.0);
    for (std::size_t e = 1; e < smooth.size(); ++e) CHECK(smooth[e] <= smooth[e - 1]);
    const double initial = rbm_reconstruction_error(rbm_init(12, 8, 0.01, derive_seed(3, 1)), data);
    CHECK(err.back() < initial);
  }

  TEST_CASE("Gibbs chain and training are reproducible") {
    const RbmParams rbm = rbm_init(10, 6, 0.5, 1);
    const Matrix v = random_unit(4, 10, 2);
    CHECK(rbm_gibbs_sample(rbm, v, 5, 77) == rbm_gibbs_sample(rbm, v, 5, 77));
    const Matrix sample = rbm_gibbs_sample(rbm, v, 3, 78);
    CHECK(((sample.array() == 0.0) || (sample.array() == 1.0)).all());

    RbmTrainConfig config;
    config.epochs = 2;
    config.cd_steps = 3;
    const Matrix data = random_unit(40, 10, 3);
    CHECK(rbm_train_cd(10, 6, data, config).params.weights == rbm_train_cd(10, 6, data, config).params.weights);
  }

  TEST_CASE("input validation") {
    RbmTrainConfig config;
    Matrix bad = random_unit(3, 4, 1);
    bad(1, 2) = 1.5;
    CHECK(kind_of([&] { rbm_train_cd(4, 2, bad, config); }) == ErrorKind::InvalidInput);
    CHECK(kind_of([&] { rbm_train_cd(5, 2, random_unit(3, 4, 1), config); }) == ErrorKind::ShapeMismatch);
    config.cd_steps = 0;
    CHECK(kind_of([&] { rbm_train_cd(4, 2, random_unit(3, 4, 1), config); }) == ErrorKind::InvalidSpec);
  }

  TEST_CASE("a one-layer stack equals a single RBM") {
    const Matrix data = random_unit(30, 8, 4);
    DbnTrainConfig config;
    config.epochs_per_layer = {3};
    config.rbm.seed = 17;
    const std::size_t widths[] = {8, 5};
    const DbnModel model = dbn_train_greedy(widths, data, config);
    RbmTrainConfig single = config.rbm;
    single.epochs = 3;
    const auto rbm = rbm_train_cd(8, 5, data, single).params;
    REQUIRE(model.depth() == 1);
    CHECK(model.layers[0].weights == rbm.weights);
    CHECK(model.layers[0].visible_bias == rbm.visible_bias);
    CHECK(model.layers[0].hidden_bias == rbm.hidden_bias);
  }

  TEST_CASE("stack shapes on a digit subset") {
    std::vector<std::size_t> rows(100);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const auto subset = select_rows(mnist(), rows);
    DbnTrainConfig config;
    config.epochs_per_layer = {1};
    const std::size_t widths[] = {784, 256, 256};
    const DbnModel model = dbn_train_greedy(widths, subset.points, config);
    CHECK(model.depth() == 2);
    CHECK(model.widths() == std::vector<std::size_t>{784, 256, 256});
    CHECK_NOTHROW(model.validate());
    const auto layers = dbn_layer_representations(model, subset);
    REQUIRE(layers.size() == 3);
    CHECK(layers[0].data.points == subset.points);
    CHECK(layers[2].layer_id == "layer2");
    CHECK(layers[2].data.points == dbn_layer_representation(model, subset, 2).points);
    CHECK(dbn_layer_representation(model, subset, 1).points == dbn_layer_representation(model, subset, 1).points);
    CHECK(kind_of([&] { dbn_layer_representation(model, subset, 3); }) == ErrorKind::LayerOutOfRange);

    const std::size_t bad_widths[] = {700, 10};
    CHECK(kind_of([&] { dbn_train_greedy(bad_widths, subset.points, config); }) == ErrorKind::ShapeMismatch);
  }

  TEST_CASE("sparsification") {
    CHECK(sparsified_unit_count(20) == 2);
    CHECK(sparsified_unit_count(256) == 26);
    CHECK(sparsified_unit_count(10) == 1);
    CHECK(sparsified_unit_count(11) == 2);
    CHECK(sparsified_unit_count(1) == 1);

    Matrix activity(2, 20);
    Rng rng(5);
    for (Eigen::Index i = 0; i < activity.size(); ++i) activity.data()[i] = rng.uniform();
    activity(0, 3) = 5.0;
    activity(0, 17) = 4.0;
    activity.row(1).setConstant(0.25);
    const Matrix sparse = winner_takes_all(activity);
    CHECK(sparse.row(0).sum() == 2.0);
    CHECK(sparse(0, 3) == 1.0);
    CHECK(sparse(0, 17) == 1.0);
    // Ties: lowest indices win.
    CHECK(sparse(1, 0) == 1.0);
    CHECK(sparse(1, 1) == 1.0);
    CHECK(sparse.row(1).sum() == 2.0);
  }

  TEST_CASE("prototypes") {
    std::vector<std::size_t> rows(300);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const auto subset = select_rows(mnist(), rows);
    DbnTrainConfig config;
    config.epochs_per_layer = {1};
    const std::size_t widths[] = {784, 64, 20};
    const DbnModel model = dbn_train_greedy(widths, subset.points, config);

    const auto layer0 = prototype_reconstruct(model, 0, 3, subset);
    std::vector<std::size_t> threes;
    for (std::size_t i = 0; i < subset.size(); ++i) {
      if (subset.labels[i] == 3) threes.push_back(i);
    }
    Eigen::RowVectorXd mean = select_rows(subset, threes).points.colwise().mean();
    mean = (mean.array() - mean.minCoeff()) / (mean.maxCoeff() - mean.minCoeff());
    CHECK(layer0.pixels.rows() == 28);
    CHECK(layer0.pixels.cols() == 28);
    for (Eigen::Index p = 0; p < 784; ++p) CHECK(layer0.pixels(p / 28, p % 28) == doctest::Approx(mean(p)).epsilon(1e-12));

    // A single class image: the prototype is its own normalized pattern.
    const std::size_t one_row[] = {threes.front()};
    const auto single = select_rows(subset, one_row);
    const auto proto = prototype_reconstruct(model, 2, 3, single);
    Eigen::RowVectorXd ip = dream_input_patterns(model, single.points, 2).row(0);
    ip = (ip.array() - ip.minCoeff()) / (ip.maxCoeff() - ip.minCoeff());
    for (Eigen::Index p = 0; p < 784; ++p) CHECK(proto.pixels(p / 28, p % 28) == doctest::Approx(ip(p)).epsilon(1e-12));
    CHECK(proto.pixels.minCoeff() >= 0.0);
    CHECK(proto.pixels.maxCoeff() <= 1.0);
    CHECK(proto.layer_index == 2);
    CHECK(proto.class_id == 3);

    // Width-20 top layer: exactly two units survive.
    const Matrix top = winner_takes_all(dbn_propagate(model, single.points, 2));
    CHECK(top.sum() == 2.0);

    CHECK(kind_of([&] { prototype_reconstruct(model, 1, 42, subset); }) == ErrorKind::NoClassImages);
    CHECK(kind_of([&] { prototype_reconstruct(model, 3, 3, subset); }) == ErrorKind::LayerOutOfRange);
    const auto narrow = make_dataset(Matrix::Zero(2, 10), {3, 3});
    CHECK(kind_of([&] { prototype_reconstruct(model, 1, 3, narrow); }) == ErrorKind::ShapeMismatch);
  }

  TEST_CASE("property: unsupervised layers separate easy digits") {
    const Label easy[] = {0, 1, 6};
    const auto subset = filter_classes(mnist(), easy, 1000);
    DbnTrainConfig config;
    config.epochs_per_layer = {5};
    std::vector<std::size_t> widths(11, 128);
    widths[0] = 784;
    const DbnModel model = dbn_train_greedy(widths, subset.points, config);
    const double g0 = compute_gdv(dbn_layer_representation(model, subset, 0)).gdv;
    const double g5 = compute_gdv(dbn_layer_representation(model, subset, 5)).gdv;
    CHECK(g5 < g0 - 0.01);
  }
}
