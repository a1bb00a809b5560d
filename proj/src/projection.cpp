#include "gdv/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "gdv/error.hpp"
#include "gdv/random.hpp"

namespace gdv {
namespace {

using ColMatrix = Eigen::MatrixXd;

double squared_distance(const Matrix &points, Eigen::Index i, Eigen::Index j) {
  return (points.row(i) - points.row(j)).squaredNorm();
}

ColMatrix double_centred_gram(const Matrix &points) {
  const auto n = points.rows();
  ColMatrix b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    b(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) b(i, j) = b(j, i) = squared_distance(points, i, j);
  }
  const Eigen::VectorXd row_means = b.rowwise().mean();
  const double grand_mean = row_means.mean();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) b(i, j) = -0.5 * (b(i, j) - row_means(i) - row_means(j) + grand_mean);
  }
  return b;
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-9 * scale) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

Projection2D mds_project(const Matrix &input, const MdsOptions &options) {
  if (input.rows() < 3) throw Error(ErrorKind::TooFewPoints, "MDS needs at least 3 points");

  Projection2D result;
  result.sample_indices.resize(static_cast<std::size_t>(input.rows()));
  std::iota(result.sample_indices.begin(), result.sample_indices.end(), std::size_t{0});
  Matrix points;
  if (options.max_points >= 3 && result.sample_indices.size() > options.max_points) {
    Rng rng(options.seed, 1);
    rng.shuffle(std::span<std::size_t>(result.sample_indices));
    result.sample_indices.resize(options.max_points);
    std::sort(result.sample_indices.begin(), result.sample_indices.end());
    points.resize(static_cast<Eigen::Index>(options.max_points), input.cols());
    for (std::size_t i = 0; i < options.max_points; ++i) {
      points.row(static_cast<Eigen::Index>(i)) = input.row(static_cast<Eigen::Index>(result.sample_indices[i]));
    }
  } else {
    points = input;
  }

  const auto n = points.rows();
  const ColMatrix gram = double_centred_gram(points);
  const Eigen::Index block = std::min<Eigen::Index>(n, 6);

  Rng rng(options.seed, 2);
  ColMatrix basis(n, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) basis(i, j) = rng.normal();
  }
  basis = Eigen::HouseholderQR<ColMatrix>(basis).householderQ() * ColMatrix::Identity(n, block);

  Eigen::VectorXd values(block);
  ColMatrix vectors(n, block);
  for (std::size_t iter = 1; iter <= std::max<std::size_t>(options.max_iterations, 1); ++iter) {
    const ColMatrix image = gram * basis;
    const ColMatrix projected = basis.transpose() * image;
    Eigen::SelfAdjointEigenSolver<ColMatrix> small(0.5 * (projected + projected.transpose()));
    // Ascending from Eigen; reverse to descending.
    values = small.eigenvalues().reverse();
    const ColMatrix rotation = small.eigenvectors().rowwise().reverse();
    vectors = basis * rotation;
    const ColMatrix image_rotated = image * rotation;

    const double scale = std::max(1.0, std::abs(values(0)));
    bool converged = true;
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(2, block); ++k) {
      const double residual = (image_rotated.col(k) - values(k) * vectors.col(k)).norm();
      result.residuals[static_cast<std::size_t>(k)] = residual;
      converged = converged && residual <= options.tolerance * scale;
    }
    result.iterations = iter;
    if (converged) break;
    basis = Eigen::HouseholderQR<ColMatrix>(gram * vectors).householderQ() * ColMatrix::Identity(n, block);
  }

  const double max_entry = gram.cwiseAbs().maxCoeff();
  if (!(values(0) > 1e-12 * max_entry) || !(values(0) > 0.0)) {
    throw Error(ErrorKind::DegenerateSpectrum, "top eigenvalue " + std::to_string(values(0)) + " is not positive");
  }

  // Recompute residuals with unit vectors so they are exact for the returned pairs.
  result.coords.resize(n, 2);
  for (Eigen::Index k = 0; k < 2; ++k) {
    Eigen::VectorXd v = vectors.col(k).normalized();
    fix_sign(v);
    const double lambda = values(k);
    result.eigenvalues[static_cast<std::size_t>(k)] = lambda;
    result.residuals[static_cast<std::size_t>(k)] = (gram * v - lambda * v).norm();
    result.coords.col(k) = v * std::sqrt(std::max(lambda, 0.0));
  }

  double residual_sum = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double original = std::sqrt(squared_distance(points, i, j));
      const double projected = (result.coords.row(i) - result.coords.row(j)).norm();
      residual_sum += (original - projected) * (original - projected);
      total += original * original;
    }
  }
  result.stress = total > 0.0 ? std::sqrt(residual_sum / total) : 0.0;
  return result;
}

Projection2D mds_project(const LabeledDataset &data, const MdsOptions &options) {
  return mds_project(data.points, options);
}

}  // namespace gdv
