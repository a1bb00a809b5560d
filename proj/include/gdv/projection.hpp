#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "gdv/dataset.hpp"

namespace gdv {

struct MdsOptions {
  /// Convergence when ||B v - lambda v|| <= tolerance * max(1, lambda_1) for
  /// both returned pairs.
  double tolerance = 1e-10;
  std::size_t max_iterations = 10000;
  /// Larger inputs are replaced by a seeded uniform subsample of this size.
  std::size_t max_points = 3000;
  std::uint64_t seed = 1;
};

struct Projection2D {
  Matrix coords;  // N × 2
  /// Top two eigenvalues of the double-centred Gram matrix, descending.
  std::array<double, 2> eigenvalues{};
  /// ||B v - lambda v|| / ||v|| per returned pair.
  std::array<double, 2> residuals{};
  /// sqrt(sum (d - d_hat)^2 / sum d^2) over all point pairs.
  double stress = 0.0;
  /// Rows of the input that were projected, ascending.
  std::vector<std::size_t> sample_indices;
  std::size_t iterations = 0;
};

/// Classical (Torgerson) MDS: B = -1/2 J D^2 J, top two eigenpairs by block
/// subspace iteration with Rayleigh-Ritz, coordinates v * sqrt(lambda). The
/// first nonzero entry of each eigenvector is made positive.
/// Errors: TooFewPoints (N < 3), DegenerateSpectrum (top eigenvalue <= 0).
Projection2D mds_project(const Matrix &points, const MdsOptions &options = {});
Projection2D mds_project(const LabeledDataset &data, const MdsOptions &options = {});

}  // namespace gdv
