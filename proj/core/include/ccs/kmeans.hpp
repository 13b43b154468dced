#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace ccs::detail {

struct KMeansResult {
  Eigen::MatrixXf centroids;       // k x dim
  std::vector<int> assignment;     // per input row, final assignment step
  std::vector<double> objective;   // sum of squared distances per iteration
};

// Lloyd iterations with k-means++ seeding. Empty clusters are re-seeded from
// the point farthest from its assigned centroid, so the per-iteration
// objective stays non-increasing. Deterministic for a fixed seed.
KMeansResult kmeans(const Eigen::MatrixXf& points, int k, int iterations,
                    std::uint64_t seed);

}  // namespace ccs::detail
