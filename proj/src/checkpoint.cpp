#include "gdv/checkpoint.hpp"

#include "binary.hpp"
#include "gdv/error.hpp"

namespace gdv {
namespace {

void put_matrix(detail::ByteWriter &w, const Matrix &m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) w.f64(m.data()[i]);
}

void put_vector(detail::ByteWriter &w, const Vector &v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) w.f64(v(i));
}

Matrix get_matrix(detail::ByteReader &r, std::size_t rows, std::size_t cols) {
  r.require(static_cast<std::uint64_t>(rows) * cols * 8, "weights");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f64();
  return m;
}

Vector get_vector(detail::ByteReader &r, std::size_t size) {
  r.require(static_cast<std::uint64_t>(size) * 8, "bias");
  Vector v(static_cast<Eigen::Index>(size));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = r.f64();
  return v;
}

void put_header(detail::ByteWriter &w, ModelKind kind, const std::vector<std::size_t> &widths) {
  w.bytes("GDVM");
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(kind));
  w.u32(static_cast<std::uint32_t>(widths.size()));
  for (std::size_t width : widths) w.u64(width);
}

struct Header {
  ModelKind kind;
  std::vector<std::size_t> widths;
};

Header get_header(detail::ByteReader &r) {
  if (r.raw(4, "magic") != "GDVM") throw Error(ErrorKind::BadMagic, r.source() + ": not a GDVM checkpoint");
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::UnsupportedVersion, r.source() + ": checkpoint version " + std::to_string(version));
  }
  const std::uint32_t kind = r.u32("model kind");
  if (kind != 1 && kind != 2) throw Error(ErrorKind::InvalidInput, r.source() + ": unknown model kind " + std::to_string(kind));
  const std::uint32_t n = r.u32("width count");
  r.require(static_cast<std::uint64_t>(n) * 8, "widths");
  Header header{static_cast<ModelKind>(kind), {}};
  for (std::uint32_t i = 0; i < n; ++i) header.widths.push_back(r.u64("width"));
  return header;
}

void expect_kind(const Header &header, ModelKind kind, const std::string &source) {
  if (header.kind != kind) {
    throw Error(ErrorKind::InvalidInput,
                source + ": checkpoint holds " + (header.kind == ModelKind::Mlp ? "an MLP" : "a DBN"));
  }
}

}  // namespace

void save_mlp(const std::filesystem::path &path, const MlpModel &model) {
  detail::ByteWriter w;
  const auto &c = model.config;
  put_header(w, ModelKind::Mlp, c.layer_widths);
  w.u32(static_cast<std::uint32_t>(c.hidden_activation));
  w.f64(c.learning_rate);
  w.f64(c.beta1);
  w.f64(c.beta2);
  w.f64(c.epsilon);
  w.u64(c.epochs);
  w.u64(c.batch_size);
  w.u64(c.seed);
  for (const auto &layer : model.layers) {
    put_matrix(w, layer.weights);
    put_vector(w, layer.bias);
  }
  w.u32(static_cast<std::uint32_t>(model.history.size()));
  for (const auto &record : model.history) {
    w.f64(record.loss);
    w.f64(record.accuracy);
  }
  detail::write_file(path, w.buffer());
}

MlpModel load_mlp(const std::filesystem::path &path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader r(bytes, path.string());
  const Header header = get_header(r);
  expect_kind(header, ModelKind::Mlp, path.string());

  MlpModel model;
  auto &c = model.config;
  c.layer_widths = header.widths;
  const std::uint32_t activation = r.u32("activation");
  if (activation > static_cast<std::uint32_t>(Activation::Logistic)) {
    throw Error(ErrorKind::InvalidInput, path.string() + ": unknown activation " + std::to_string(activation));
  }
  c.hidden_activation = static_cast<Activation>(activation);
  c.learning_rate = r.f64();
  c.beta1 = r.f64();
  c.beta2 = r.f64();
  c.epsilon = r.f64();
  c.epochs = r.u64();
  c.batch_size = r.u64();
  c.seed = r.u64();
  c.validate();
  for (std::size_t l = 0; l + 1 < c.layer_widths.size(); ++l) {
    DenseLayer layer;
    layer.weights = get_matrix(r, c.layer_widths[l + 1], c.layer_widths[l]);
    layer.bias = get_vector(r, c.layer_widths[l + 1]);
    model.layers.push_back(std::move(layer));
  }
  const std::uint32_t epochs = r.u32("history count");
  r.require(static_cast<std::uint64_t>(epochs) * 16, "history");
  for (std::uint32_t e = 0; e < epochs; ++e) {
    EpochRecord record;
    record.loss = r.f64();
    record.accuracy = r.f64();
    model.history.push_back(record);
  }
  return model;
}

void save_dbn(const std::filesystem::path &path, const DbnModel &model) {
  model.validate();
  detail::ByteWriter w;
  put_header(w, ModelKind::Dbn, model.widths());
  for (const auto &rbm : model.layers) {
    put_matrix(w, rbm.weights);
    put_vector(w, rbm.visible_bias);
    put_vector(w, rbm.hidden_bias);
  }
  detail::write_file(path, w.buffer());
}

DbnModel load_dbn(const std::filesystem::path &path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader r(bytes, path.string());
  const Header header = get_header(r);
  expect_kind(header, ModelKind::Dbn, path.string());
  if (header.widths.size() < 2) throw Error(ErrorKind::InvalidInput, path.string() + ": DBN needs two widths");

  DbnModel model;
  for (std::size_t l = 0; l + 1 < header.widths.size(); ++l) {
    RbmParams rbm;
    rbm.weights = get_matrix(r, header.widths[l + 1], header.widths[l]);
    rbm.visible_bias = get_vector(r, header.widths[l]);
    rbm.hidden_bias = get_vector(r, header.widths[l + 1]);
    model.layers.push_back(std::move(rbm));
  }
  model.validate();
  return model;
}

ModelKind peek_model_kind(const std::filesystem::path &path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader r(bytes, path.string());
  return get_header(r).kind;
}

}  // namespace gdv
