#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "gdv/dataset.hpp"
#include "gdv/random.hpp"

namespace gdv::testing {

/// Random labeled dataset with every class holding at least two points. Each
/// class gets its own random centre so the data is not label-independent.
inline LabeledDataset random_dataset(Rng &rng, std::size_t max_points = 60, std::size_t max_dim = 6,
                                     std::size_t max_classes = 4) {
  const auto classes = static_cast<std::size_t>(rng.uniform_int(2, max_classes));
  const auto dim = static_cast<std::size_t>(rng.uniform_int(1, max_dim));
  const auto n = static_cast<std::size_t>(rng.uniform_int(2 * classes, std::max(2 * classes, max_points)));
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<Label>(i < 2 * classes ? i / 2 : rng.uniform_int(0, classes - 1));
  rng.shuffle(std::span<Label>(labels));

  Matrix centers(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < centers.size(); ++i) centers.data()[i] = rng.uniform(-3.0, 3.0);
  Matrix points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
          centers(labels[i], static_cast<Eigen::Index>(d)) + rng.normal();
    }
  }
  return make_dataset(std::move(points), std::move(labels));
}

inline std::vector<std::size_t> random_permutation(Rng &rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(p));
  return p;
}

}  // namespace gdv::testing
