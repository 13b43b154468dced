#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

#include "ccs/binary_code.hpp"
#include "ccs/descriptor.hpp"

namespace ccs {

struct ItqOptions {
  int iterations = 50;
  std::uint64_t seed = 0;
};

// Bookkeeping from rotation training. `rotation` is the learned orthogonal
// matrix alone (double precision), before composition with the PCA basis;
// `losses[t]` is the quantization objective after iteration t+1.
struct ItqTrainingMeta {
  int iterations = 0;
  std::vector<double> losses;
  Eigen::MatrixXd rotation;
  int covariance_rank = kDescriptorDim;
  bool degenerate_covariance = false;
};

// Learned binarizer: h(d) = sign(projection * (d - mean)), one bit per row.
// `projection` composes the PCA basis and the learned rotation, so rows are
// orthonormal up to float rounding.
struct HashModel {
  Eigen::Matrix<float, kDescriptorDim, kDescriptorDim> projection;
  Descriptor mean;
  ItqTrainingMeta meta;

  BinaryCode hash(const Descriptor& d) const;
};

// Learns mean, PCA basis and an orthogonal rotation minimizing the binary
// quantization loss by alternating sign assignment and Procrustes updates.
// Requires at least kDescriptorDim finite descriptors. A rank-deficient
// covariance is tolerated: the eigenbasis of the degenerate subspace is
// arbitrary but orthonormal, and meta.degenerate_covariance is set.
HashModel train_hash(std::span<const Descriptor> descriptors,
                     const ItqOptions& opts = {});

}  // namespace ccs
