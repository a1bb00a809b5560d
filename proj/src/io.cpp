#include "gdv/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "binary.hpp"
#include "gdv/error.hpp"

namespace gdv {

namespace detail {

std::vector<unsigned char> read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::IoError, "read failed for " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path &path, const std::vector<unsigned char> &bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot create " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace detail

namespace {

std::ofstream open_text(const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot create " + path.string());
  return out;
}

void finish(std::ofstream &out, const std::filesystem::path &path) {
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

/// Both indices are 1-based and count data rows only.
std::string where(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

LabeledDataset load_labeled_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, path.string() + ": missing header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  const auto header = split_commas(line);
  if (header.size() < 2 || header.back() != "label") {
    throw Error(ErrorKind::MissingLabelColumn, path.string() + ": final header column must be 'label'");
  }
  const std::size_t dims = header.size() - 1;

  std::vector<double> values;
  std::vector<Label> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::ParseError, path.string() + ": row " + std::to_string(row) + " has " +
                                             std::to_string(cells.size()) + " cells, expected " +
                                             std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < dims; ++c) {
      double v = 0.0;
      const auto cell = cells[c];
      const auto result = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (result.ec != std::errc() || result.ptr != cell.data() + cell.size() || cell.empty()) {
        throw Error(ErrorKind::ParseError, path.string() + ": " + where(row, c + 1) + ": '" + std::string(cell) + "'");
      }
      if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteValue, path.string() + ": " + where(row, c + 1));
      values.push_back(v);
    }
    const auto cell = cells.back();
    std::uint64_t label = 0;
    const auto result = std::from_chars(cell.data(), cell.data() + cell.size(), label);
    if (result.ec != std::errc() || result.ptr != cell.data() + cell.size() || cell.empty() ||
        label > std::numeric_limits<Label>::max()) {
      throw Error(ErrorKind::ParseError,
                  path.string() + ": " + where(row, dims) + ": label '" + std::string(cell) + "' is not a non-negative integer");
    }
    labels.push_back(static_cast<Label>(label));
  }
  if (labels.empty()) throw Error(ErrorKind::ParseError, path.string() + ": no data rows");

  Matrix points = Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(labels.size()),
                                     static_cast<Eigen::Index>(dims));
  return make_dataset(std::move(points), std::move(labels));
}

void save_labeled_csv(const std::filesystem::path &path, const LabeledDataset &data) {
  data.validate();
  auto out = open_text(path);
  for (std::size_t d = 0; d < data.dim(); ++d) out << 'x' << d << ',';
  out << "label\n";
  for (Eigen::Index r = 0; r < data.points.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.points.cols(); ++c) out << format_double(data.points(r, c)) << ',';
    out << data.labels[static_cast<std::size_t>(r)] << '\n';
  }
  finish(out, path);
}

// ---------------------------------------------------------------------------

Matrix load_idx_images(const std::filesystem::path &path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader reader(bytes, path.string());
  const std::uint32_t magic = reader.u32_be("magic");
  if (magic != kIdxImagesMagic) throw Error(ErrorKind::BadMagic, path.string() + ": not an IDX image file");
  const std::uint64_t count = reader.u32_be("image count");
  const std::uint64_t rows = reader.u32_be("row count");
  const std::uint64_t cols = reader.u32_be("column count");
  reader.require(count * rows * cols, "pixel payload");

  Matrix images(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(rows * cols));
  for (Eigen::Index i = 0; i < images.rows(); ++i) {
    for (Eigen::Index p = 0; p < images.cols(); ++p) images(i, p) = static_cast<double>(reader.u8()) / 255.0;
  }
  return images;
}

std::vector<Label> load_idx_labels(const std::filesystem::path &path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader reader(bytes, path.string());
  const std::uint32_t magic = reader.u32_be("magic");
  if (magic != kIdxLabelsMagic) throw Error(ErrorKind::BadMagic, path.string() + ": not an IDX label file");
  const std::uint32_t count = reader.u32_be("label count");
  reader.require(count, "label payload");
  std::vector<Label> labels(count);
  for (auto &label : labels) label = reader.u8();
  return labels;
}

LabeledDataset load_idx_dataset(const std::filesystem::path &images, const std::filesystem::path &labels) {
  LabeledDataset data;
  data.points = load_idx_images(images);
  data.labels = load_idx_labels(labels);
  if (data.labels.size() != data.size()) {
    throw Error(ErrorKind::DimensionMismatch, std::to_string(data.size()) + " images but " +
                                                  std::to_string(data.labels.size()) + " labels");
  }
  return data;
}

void write_idx_images(const std::filesystem::path &path, std::span<const std::uint8_t> pixels, std::uint32_t count,
                      std::uint32_t rows, std::uint32_t cols) {
  if (pixels.size() != static_cast<std::size_t>(count) * rows * cols) {
    throw Error(ErrorKind::DimensionMismatch, "pixel buffer does not match the declared sizes");
  }
  std::vector<unsigned char> bytes;
  for (std::uint32_t v : {kIdxImagesMagic, count, rows, cols}) {
    for (int i = 3; i >= 0; --i) bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  bytes.insert(bytes.end(), pixels.begin(), pixels.end());
  detail::write_file(path, bytes);
}

void write_idx_labels(const std::filesystem::path &path, std::span<const std::uint8_t> labels) {
  std::vector<unsigned char> bytes;
  for (std::uint32_t v : {kIdxLabelsMagic, static_cast<std::uint32_t>(labels.size())}) {
    for (int i = 3; i >= 0; --i) bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  bytes.insert(bytes.end(), labels.begin(), labels.end());
  detail::write_file(path, bytes);
}

// ---------------------------------------------------------------------------

void ActivationArchive::validate() const {
  for (const auto &layer : layers) {
    if (static_cast<std::size_t>(layer.values.rows()) != labels.size()) {
      throw Error(ErrorKind::DimensionMismatch, "layer '" + layer.layer_id + "' has " +
                                                    std::to_string(layer.values.rows()) + " rows, archive has " +
                                                    std::to_string(labels.size()) + " labels");
    }
  }
}

ActivationArchive read_activation_archive(const std::filesystem::path &path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader reader(bytes, path.string());
  if (reader.raw(4, "magic") != "GDVA") throw Error(ErrorKind::BadMagic, path.string() + ": not a GDVA archive");
  const std::uint32_t version = reader.u32("version");
  if (version != kArchiveVersion) {
    throw Error(ErrorKind::UnsupportedVersion, path.string() + ": archive version " + std::to_string(version));
  }
  const std::uint32_t layer_count = reader.u32("layer count");

  ActivationArchive archive;
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    ActivationLayer layer;
    layer.layer_id = reader.string("layer id");
    const std::uint64_t rows = reader.u32("row count");
    const std::uint64_t cols = reader.u32("column count");
    reader.require(rows * cols * 4, "layer values");
    layer.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < layer.values.size(); ++i) layer.values.data()[i] = reader.f32();
    archive.layers.push_back(std::move(layer));
  }
  const std::uint64_t label_count = reader.u32("label count");
  reader.require(label_count * 4, "labels");
  archive.labels.resize(label_count);
  for (auto &label : archive.labels) label = reader.u32();
  if (reader.remaining() > 0) archive.provenance = reader.string("provenance");
  archive.validate();
  return archive;
}

void write_activation_archive(const std::filesystem::path &path, const ActivationArchive &archive) {
  archive.validate();
  detail::ByteWriter writer;
  writer.bytes("GDVA");
  writer.u32(kArchiveVersion);
  writer.u32(static_cast<std::uint32_t>(archive.layers.size()));
  for (const auto &layer : archive.layers) {
    writer.string(layer.layer_id);
    writer.u32(static_cast<std::uint32_t>(layer.values.rows()));
    writer.u32(static_cast<std::uint32_t>(layer.values.cols()));
    for (Eigen::Index i = 0; i < layer.values.size(); ++i) writer.f32(layer.values.data()[i]);
  }
  writer.u32(static_cast<std::uint32_t>(archive.labels.size()));
  for (std::uint32_t label : archive.labels) writer.u32(label);
  if (!archive.provenance.empty()) writer.string(archive.provenance);
  detail::write_file(path, writer.buffer());
}

ActivationArchive make_activation_archive(std::span<const LayerData> layers, std::string provenance) {
  ActivationArchive archive;
  archive.provenance = std::move(provenance);
  if (!layers.empty()) archive.labels.assign(layers.front().data.labels.begin(), layers.front().data.labels.end());
  for (const auto &layer : layers) {
    if (layer.data.labels != layers.front().data.labels) {
      throw Error(ErrorKind::LabelMismatch, "layer '" + layer.layer_id + "' carries a different label vector");
    }
    archive.layers.push_back({layer.layer_id, layer.data.points.cast<float>()});
  }
  archive.validate();
  return archive;
}

std::vector<LayerData> archive_layers(const ActivationArchive &archive) {
  archive.validate();
  std::vector<LayerData> layers;
  layers.reserve(archive.layers.size());
  for (const auto &layer : archive.layers) {
    LabeledDataset data;
    data.points = layer.values.cast<double>();
    data.labels.assign(archive.labels.begin(), archive.labels.end());
    layers.push_back({layer.layer_id, std::move(data)});
  }
  return layers;
}

// ---------------------------------------------------------------------------

nlohmann::json report_to_json(const GdvReport &report) {
  nlohmann::json intra = nlohmann::json::object();
  nlohmann::json counts = nlohmann::json::object();
  for (const auto &[label, value] : report.intra) intra[std::to_string(label)] = value;
  for (const auto &[label, count] : report.class_counts) counts[std::to_string(label)] = count;
  nlohmann::json inter = nlohmann::json::array();
  for (const auto &[pair, value] : report.inter) inter.push_back({{"a", pair.first}, {"b", pair.second}, {"value", value}});
  return {
      {"schema", kReportSchema},
      {"gdv", report.gdv},
      {"metric", report.metric_name},
      {"effective_dim", report.effective_dim},
      {"n_classes", report.n_classes},
      {"class_counts", counts},
      {"intra", intra},
      {"inter", inter},
  };
}

GdvReport report_from_json(const nlohmann::json &json) {
  try {
    if (json.at("schema").get<std::string>() != kReportSchema) {
      throw Error(ErrorKind::ParseError, "unexpected schema '" + json.at("schema").get<std::string>() + "'");
    }
    GdvReport report;
    report.gdv = json.at("gdv").get<double>();
    report.metric_name = json.at("metric").get<std::string>();
    report.effective_dim = json.at("effective_dim").get<std::size_t>();
    report.n_classes = json.at("n_classes").get<std::size_t>();
    for (const auto &[key, value] : json.at("class_counts").items()) {
      report.class_counts[static_cast<Label>(std::stoul(key))] = value.get<std::size_t>();
    }
    for (const auto &[key, value] : json.at("intra").items()) {
      report.intra[static_cast<Label>(std::stoul(key))] = value.get<double>();
    }
    for (const auto &entry : json.at("inter")) {
      report.inter[ClassPair{entry.at("a").get<Label>(), entry.at("b").get<Label>()}] = entry.at("value").get<double>();
    }
    return report;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ParseError, std::string("report JSON: ") + e.what());
  } catch (const std::logic_error &e) {
    throw Error(ErrorKind::ParseError, std::string("report JSON: ") + e.what());
  }
}

nlohmann::json curve_to_json(const GdvCurve &curve) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto &point = curve.points[i];
    nlohmann::json entry = {{"layer_index", i}, {"layer_id", point.layer_id}};
    entry["gdv"] = point.gdv ? nlohmann::json(*point.gdv) : nlohmann::json(nullptr);
    if (point.failure) entry["failure"] = std::string(to_string(*point.failure));
    layers.push_back(std::move(entry));
  }
  return {{"schema", kCurveSchema}, {"layers", layers}};
}

nlohmann::json histogram_to_json(const Histogram &histogram) {
  return {{"lo", histogram.lo()}, {"hi", histogram.hi()}, {"bins", histogram.bins()}, {"counts", histogram.counts()}};
}

nlohmann::json delta_stats_to_json(const DeltaGdvStats &stats) {
  return {
      {"schema", kDeltaSchema},
      {"kind", std::string(to_string(stats.kind))},
      {"input_frame", std::string(to_string(stats.frame))},
      {"mean_before", stats.mean_before},
      {"mean_after", stats.mean_after},
      {"mean_delta", stats.mean_delta},
      {"stddev_delta", stats.stddev_delta},
      {"min_delta", stats.min_delta},
      {"max_delta", stats.max_delta},
      {"n_valid", stats.n_valid},
      {"n_skipped", stats.n_skipped},
      {"n_small_class", stats.n_small_class},
      {"n_degenerate", stats.n_degenerate},
      {"histogram", histogram_to_json(stats.histogram)},
  };
}

nlohmann::json ensemble_stats_to_json(const EnsembleGdvStats &stats) {
  return {
      {"schema", kEnsembleSchema},
      {"mean_gdv", stats.mean_gdv},
      {"stddev_gdv", stats.stddev_gdv},
      {"min_gdv", stats.min_gdv},
      {"max_gdv", stats.max_gdv},
      {"n_valid", stats.n_valid},
      {"n_skipped", stats.n_skipped},
      {"histogram", histogram_to_json(stats.histogram)},
  };
}

void write_json(const std::filesystem::path &path, const nlohmann::json &json) {
  auto out = open_text(path);
  out << json.dump(2) << '\n';
  finish(out, path);
}

nlohmann::json read_json(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

void write_report_json(const std::filesystem::path &path, const GdvReport &report) {
  write_json(path, report_to_json(report));
}

GdvReport read_report_json(const std::filesystem::path &path) { return report_from_json(read_json(path)); }

void write_curve_csv(const std::filesystem::path &path, const GdvCurve &curve) {
  auto out = open_text(path);
  out << "layer_index,layer_id,gdv,missing_flag\n";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto &point = curve.points[i];
    out << i << ',' << point.layer_id << ',' << (point.gdv ? format_double(*point.gdv) : std::string()) << ','
        << (point.gdv ? 0 : 1) << '\n';
  }
  finish(out, path);
}

void write_histogram_csv(const std::filesystem::path &path, const Histogram &histogram) {
  auto out = open_text(path);
  out << "bin_center,count\n";
  for (std::size_t b = 0; b < histogram.bins(); ++b) {
    out << format_double(histogram.bin_center(b)) << ',' << histogram.counts()[b] << '\n';
  }
  finish(out, path);
}

void write_scatter_csv(const std::filesystem::path &path, const Projection2D &projection,
                       std::span<const Label> labels) {
  auto out = open_text(path);
  out << "x,y,label\n";
  for (Eigen::Index i = 0; i < projection.coords.rows(); ++i) {
    const std::size_t source = projection.sample_indices.at(static_cast<std::size_t>(i));
    out << format_double(projection.coords(i, 0)) << ',' << format_double(projection.coords(i, 1)) << ','
        << labels[source] << '\n';
  }
  finish(out, path);
}

}  // namespace gdv
