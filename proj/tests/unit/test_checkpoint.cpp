#include <doctest.h>

#include "gdv/checkpoint.hpp"
#include "gdv/error.hpp"
#include "gdv/random.hpp"
#include "temp_dir.hpp"

using namespace gdv;
using gdv::testing::read_text;
using gdv::testing::TempDir;
using gdv::testing::write_text;

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

MlpModel sample_mlp() {
  MlpConfig config;
  config.layer_widths = {5, 7, 3};
  config.hidden_activation = Activation::Tanh;
  config.learning_rate = 0.0123;
  config.epochs = 4;
  config.batch_size = 9;
  config.seed = 0xDEADBEEFCAFEULL;
  MlpModel model = mlp_init(config);
  model.history = {{1.25, 0.5}, {0.75, 0.875}};
  return model;
}

DbnModel sample_dbn() {
  DbnModel model;
  model.layers = {rbm_init(6, 4, 0.3, 1), rbm_init(4, 3, 0.3, 2)};
  Rng rng(3);
  for (auto &rbm : model.layers) {
    for (Eigen::Index i = 0; i < rbm.visible_bias.size(); ++i) rbm.visible_bias(i) = rng.normal();
    for (Eigen::Index i = 0; i < rbm.hidden_bias.size(); ++i) rbm.hidden_bias(i) = rng.normal();
  }
  return model;
}

}  // namespace

TEST_SUITE("checkpoint") {
  TEST_CASE("MLP round trip is exact") {
    TempDir dir;
    const MlpModel model = sample_mlp();
    save_mlp(dir / "m.gdvm", model);
    CHECK(peek_model_kind(dir / "m.gdvm") == ModelKind::Mlp);
    const MlpModel back = load_mlp(dir / "m.gdvm");
    CHECK(back.config.layer_widths == model.config.layer_widths);
    CHECK(back.config.hidden_activation == Activation::Tanh);
    CHECK(back.config.learning_rate == model.config.learning_rate);
    CHECK(back.config.beta1 == model.config.beta1);
    CHECK(back.config.beta2 == model.config.beta2);
    CHECK(back.config.epsilon == model.config.epsilon);
    CHECK(back.config.epochs == 4);
    CHECK(back.config.batch_size == 9);
    CHECK(back.config.seed == model.config.seed);
    REQUIRE(back.layers.size() == model.layers.size());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      CHECK(back.layers[l].weights == model.layers[l].weights);
      CHECK(back.layers[l].bias == model.layers[l].bias);
    }
    REQUIRE(back.history.size() == 2);
    CHECK(back.history[1].loss == 0.75);
    CHECK(back.history[1].accuracy == 0.875);

    save_mlp(dir / "again.gdvm", back);
    CHECK(read_text(dir / "again.gdvm") == read_text(dir / "m.gdvm"));
  }

  TEST_CASE("DBN round trip is exact") {
    TempDir dir;
    const DbnModel model = sample_dbn();
    save_dbn(dir / "d.gdvm", model);
    CHECK(peek_model_kind(dir / "d.gdvm") == ModelKind::Dbn);
    const DbnModel back = load_dbn(dir / "d.gdvm");
    CHECK(back.widths() == std::vector<std::size_t>{6, 4, 3});
    for (std::size_t l = 0; l < model.depth(); ++l) {
      CHECK(back.layers[l].weights == model.layers[l].weights);
      CHECK(back.layers[l].visible_bias == model.layers[l].visible_bias);
      CHECK(back.layers[l].hidden_bias == model.layers[l].hidden_bias);
    }
  }

  TEST_CASE("errors") {
    TempDir dir;
    save_mlp(dir / "m.gdvm", sample_mlp());
    save_dbn(dir / "d.gdvm", sample_dbn());
    CHECK(kind_of([&] { load_dbn(dir / "m.gdvm"); }) == ErrorKind::InvalidInput);
    CHECK(kind_of([&] { load_mlp(dir / "d.gdvm"); }) == ErrorKind::InvalidInput);
    CHECK(kind_of([&] { load_mlp(dir / "absent.gdvm"); }) == ErrorKind::IoError);

    const std::string bytes = read_text(dir / "m.gdvm");
    CHECK(bytes.substr(0, 4) == "GDVM");
    std::string magic = bytes;
    magic[1] = 'X';
    write_text(dir / "x.gdvm", magic);
    CHECK(kind_of([&] { load_mlp(dir / "x.gdvm"); }) == ErrorKind::BadMagic);
    std::string version = bytes;
    version[4] = 9;
    write_text(dir / "v.gdvm", version);
    CHECK(kind_of([&] { load_mlp(dir / "v.gdvm"); }) == ErrorKind::UnsupportedVersion);
    for (std::size_t cut : {std::size_t{2}, std::size_t{14}, bytes.size() / 2, bytes.size() - 1}) {
      write_text(dir / "t.gdvm", bytes.substr(0, cut));
      CHECK(kind_of([&] { load_mlp(dir / "t.gdvm"); }) == ErrorKind::TruncatedFile);
    }
  }
}
