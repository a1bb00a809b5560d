#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdv/dataset.hpp"
#include "gdv/metric.hpp"
#include "gdv/projection.hpp"
#include "gdv/transform.hpp"

namespace gdv {

// ---------------------------------------------------------------------------
// Labeled CSV: header row, final column "label" (non-negative integers), all
// other columns numeric. Values are written with 17 significant digits.

/// Errors: IoError, ParseError (row/column in the message), NonFiniteValue,
/// MissingLabelColumn.
LabeledDataset load_labeled_csv(const std::filesystem::path &path);
void save_labeled_csv(const std::filesystem::path &path, const LabeledDataset &data);

/// Shortest text with 17 significant digits, as used by every text writer.
std::string format_double(double value);

// ---------------------------------------------------------------------------
// IDX (MNIST distribution format): big-endian magic and sizes, unsigned bytes.

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// N × (rows·cols) matrix scaled to [0, 1] by 1/255.
/// Errors: IoError, BadMagic, TruncatedFile.
Matrix load_idx_images(const std::filesystem::path &path);
std::vector<Label> load_idx_labels(const std::filesystem::path &path);
/// Throws DimensionMismatch when image and label counts differ.
LabeledDataset load_idx_dataset(const std::filesystem::path &images, const std::filesystem::path &labels);

void write_idx_images(const std::filesystem::path &path, std::span<const std::uint8_t> pixels, std::uint32_t count,
                      std::uint32_t rows, std::uint32_t cols);
void write_idx_labels(const std::filesystem::path &path, std::span<const std::uint8_t> labels);

// ---------------------------------------------------------------------------
// GDVA activation archive, little-endian:
//   "GDVA" u32 version=1 u32 layer_count
//   per layer: u32 id_length, id bytes (UTF-8), u32 rows, u32 cols,
//              rows·cols f32 row-major
//   u32 label_count, label_count u32
//   optional trailer: u32 length, provenance bytes (UTF-8); absent if empty.

using FloatMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ActivationLayer {
  std::string layer_id;
  FloatMatrix values;
};

struct ActivationArchive {
  std::vector<ActivationLayer> layers;
  std::vector<std::uint32_t> labels;
  std::string provenance;

  /// Throws DimensionMismatch if a layer's row count differs from the labels.
  void validate() const;
};

inline constexpr std::uint32_t kArchiveVersion = 1;

/// Errors: IoError, BadMagic, UnsupportedVersion, TruncatedFile, DimensionMismatch.
ActivationArchive read_activation_archive(const std::filesystem::path &path);
void write_activation_archive(const std::filesystem::path &path, const ActivationArchive &archive);

ActivationArchive make_activation_archive(std::span<const LayerData> layers, std::string provenance = {});
std::vector<LayerData> archive_layers(const ActivationArchive &archive);

// ---------------------------------------------------------------------------
// Reports.

inline constexpr const char *kReportSchema = "gdv-report/1";
inline constexpr const char *kCurveSchema = "gdv-curve/1";
inline constexpr const char *kDeltaSchema = "gdv-delta-stats/1";
inline constexpr const char *kEnsembleSchema = "gdv-ensemble-stats/1";

nlohmann::json report_to_json(const GdvReport &report);
/// Throws ParseError on schema violations.
GdvReport report_from_json(const nlohmann::json &json);
nlohmann::json curve_to_json(const GdvCurve &curve);
nlohmann::json histogram_to_json(const Histogram &histogram);
nlohmann::json delta_stats_to_json(const DeltaGdvStats &stats);
nlohmann::json ensemble_stats_to_json(const EnsembleGdvStats &stats);

void write_json(const std::filesystem::path &path, const nlohmann::json &json);
nlohmann::json read_json(const std::filesystem::path &path);

void write_report_json(const std::filesystem::path &path, const GdvReport &report);
GdvReport read_report_json(const std::filesystem::path &path);

/// Columns: layer_index,layer_id,gdv,missing_flag. A missing value leaves the
/// gdv cell empty and sets missing_flag to 1.
void write_curve_csv(const std::filesystem::path &path, const GdvCurve &curve);
/// Columns: bin_center,count.
void write_histogram_csv(const std::filesystem::path &path, const Histogram &histogram);
/// Columns: x,y,label.
void write_scatter_csv(const std::filesystem::path &path, const Projection2D &projection,
                       std::span<const Label> labels);

// ---------------------------------------------------------------------------
// SVG plots: self-contained, categorical 10-colour palette, legend.

struct LineSeries {
  std::string name;
  std::vector<double> x;
  std::vector<std::optional<double>> y;
};

LineSeries curve_series(std::string name, const GdvCurve &curve);

/// One <circle> per projected point; the legend uses <rect> swatches.
/// `labels` are per input row; they are mapped through sample_indices.
void write_svg_scatter(const std::filesystem::path &path, const Projection2D &projection,
                       std::span<const Label> labels, const std::string &title = {});
void write_svg_lines(const std::filesystem::path &path, std::span<const LineSeries> series,
                     const std::string &title = {}, const std::string &x_label = "layer",
                     const std::string &y_label = "GDV");

}  // namespace gdv
