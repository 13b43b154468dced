#include "ccs/hash.hpp"

#include <Eigen/Dense>

#include <cstdio>
#include <random>
#include <stdexcept>

namespace ccs {

BinaryCode HashModel::hash(const Descriptor& d) const {
  const Descriptor y = projection * (d - mean);
  BinaryCode code;
  for (int i = 0; i < kDescriptorDim; ++i) {
    code.set_bit(i, y[i] > 0.0f);  // exact zero maps to 0
  }
  return code;
}

namespace {

// Deterministic random orthogonal matrix: QR of a Gaussian matrix with the
// sign of R's diagonal folded into Q.
Eigen::MatrixXd random_rotation(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) g(r, c) = gauss(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < n; ++c) {
    if (r(c, c) < 0) q.col(c) = -q.col(c);
  }
  return q;
}

}  // namespace

HashModel train_hash(std::span<const Descriptor> descriptors,
                     const ItqOptions& opts) {
  const int n = static_cast<int>(descriptors.size());
  const int d = kDescriptorDim;
  if (n < d) {
    throw std::invalid_argument(
        "train_hash: need at least 128 descriptors, got " + std::to_string(n));
  }
  if (opts.iterations < 1) {
    throw std::invalid_argument("train_hash: iterations must be >= 1");
  }

  Eigen::MatrixXd data(n, d);
  for (int i = 0; i < n; ++i) {
    if (!is_finite(descriptors[i])) {
      throw std::invalid_argument("train_hash: non-finite descriptor at index " +
                                  std::to_string(i));
    }
    data.row(i) = descriptors[i].cast<double>().transpose();
  }

  const Eigen::RowVectorXd mean = data.colwise().mean();
  data.rowwise() -= mean;

  const Eigen::MatrixXd cov = (data.transpose() * data) / double(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("train_hash: eigendecomposition failed");
  }
  // Descending eigenvalue order; eigenvectors of (near-)zero eigenvalues are
  // an arbitrary orthonormal completion, which is all the rotation step needs.
  Eigen::MatrixXd basis(d, d);
  for (int c = 0; c < d; ++c) basis.col(c) = eig.eigenvectors().col(d - 1 - c);
  const double lambda_max = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  int rank = 0;
  for (int c = 0; c < d; ++c) {
    if (eig.eigenvalues()[c] > 1e-12 * std::max(lambda_max, 1e-300)) ++rank;
  }

  HashModel model;
  model.meta.covariance_rank = rank;
  model.meta.degenerate_covariance = rank < d;
  if (model.meta.degenerate_covariance) {
    std::fprintf(stderr,
                 "train_hash: covariance rank %d < %d, rotating within the "
                 "non-degenerate subspace\n",
                 rank, d);
  }

  const Eigen::MatrixXd projected = data * basis;  // n x d

  std::mt19937_64 rng(opts.seed);
  Eigen::MatrixXd rotation = random_rotation(d, rng);

  model.meta.losses.reserve(opts.iterations);
  Eigen::MatrixXd z(n, d), b(n, d);
  for (int it = 0; it < opts.iterations; ++it) {
    z.noalias() = projected * rotation;
    b = z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : -1.0; });
    // Procrustes: argmin_R ||B - V R||_F with R orthogonal.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        projected.transpose() * b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    rotation.noalias() = svd.matrixU() * svd.matrixV().transpose();
    model.meta.losses.push_back((b - projected * rotation).squaredNorm());
  }
  model.meta.iterations = opts.iterations;
  model.meta.rotation = rotation;

  model.projection = (rotation.transpose() * basis.transpose()).cast<float>();
  model.mean = mean.transpose().cast<float>();
  return model;
}

}  // namespace ccs
