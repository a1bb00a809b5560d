#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gdv {

/// Row-major so that each point is a contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using Label = std::uint32_t;

/// N points in D dimensions, each carrying a class label.
struct LabeledDataset {
  Matrix points;
  std::vector<Label> labels;
  std::map<Label, std::string> class_names;

  std::size_t size() const noexcept { return static_cast<std::size_t>(points.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(points.cols()); }

  /// Throws InvalidInput, ShapeMismatch or NonFiniteValue.
  void validate() const;
};

LabeledDataset make_dataset(Matrix points, std::vector<Label> labels);

/// Point indices per class, keyed by ascending class id.
std::map<Label, std::vector<std::size_t>> class_members(std::span<const Label> labels);

LabeledDataset select_rows(const LabeledDataset &data, std::span<const std::size_t> rows);

/// Keeps rows whose label is in `classes`, at most `per_set_limit` rows in total
/// (0 = no limit), preserving row order.
LabeledDataset filter_classes(const LabeledDataset &data, std::span<const Label> classes,
                              std::size_t per_set_limit = 0);

}  // namespace gdv
