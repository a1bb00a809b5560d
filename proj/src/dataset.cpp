#include "gdv/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "gdv/error.hpp"

namespace gdv {

void LabeledDataset::validate() const {
  if (points.rows() < 1 || points.cols() < 1) {
    throw Error(ErrorKind::InvalidInput, "dataset needs at least one point and one dimension");
  }
  if (labels.size() != size()) {
    throw Error(ErrorKind::ShapeMismatch, "label count " + std::to_string(labels.size()) +
                                              " != point count " + std::to_string(size()));
  }
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      if (!std::isfinite(points(r, c))) {
        throw Error(ErrorKind::NonFiniteValue,
                    "row " + std::to_string(r) + ", column " + std::to_string(c));
      }
    }
  }
}

LabeledDataset make_dataset(Matrix points, std::vector<Label> labels) {
  LabeledDataset data{std::move(points), std::move(labels), {}};
  data.validate();
  return data;
}

std::map<Label, std::vector<std::size_t>> class_members(std::span<const Label> labels) {
  std::map<Label, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  return members;
}

LabeledDataset select_rows(const LabeledDataset &data, std::span<const std::size_t> rows) {
  LabeledDataset out;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), data.points.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= data.size()) throw Error(ErrorKind::InvalidInput, "row index out of range");
    out.points.row(static_cast<Eigen::Index>(i)) = data.points.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(data.labels[rows[i]]);
  }
  out.class_names = data.class_names;
  return out;
}

LabeledDataset filter_classes(const LabeledDataset &data, std::span<const Label> classes,
                              std::size_t per_set_limit) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (per_set_limit != 0 && rows.size() == per_set_limit) break;
    if (std::find(classes.begin(), classes.end(), data.labels[i]) != classes.end()) rows.push_back(i);
  }
  return select_rows(data, rows);
}

}  // namespace gdv
