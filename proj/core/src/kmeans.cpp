#include "ccs/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

namespace ccs::detail {

namespace {

// Index drawn proportionally to `weights` (all >= 0). Falls back to uniform
// when every weight is zero (fewer distinct points than clusters).
int weighted_draw(const std::vector<double>& weights, std::mt19937_64& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) {
    std::uniform_int_distribution<std::size_t> uni(0, weights.size() - 1);
    return static_cast<int>(uni(rng));
  }
  std::uniform_real_distribution<double> uni(0.0, total);
  const double u = uni(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size() - 1);
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXf& points, int k, int iterations,
                    std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  const Eigen::Index dim = points.cols();
  if (n < k) throw std::invalid_argument("kmeans: fewer points than clusters");
  if (iterations < 1) throw std::invalid_argument("kmeans: iterations < 1");

  std::mt19937_64 rng(seed);

  KMeansResult result;
  result.centroids.resize(k, dim);

  // k-means++ seeding.
  {
    std::uniform_int_distribution<Eigen::Index> uni(0, n - 1);
    result.centroids.row(0) = points.row(uni(rng));
    std::vector<double> min_d2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      min_d2[i] = (points.row(i) - result.centroids.row(0)).squaredNorm();
    }
    for (int c = 1; c < k; ++c) {
      const int pick = weighted_draw(min_d2, rng);
      result.centroids.row(c) = points.row(pick);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d2 =
            (points.row(i) - result.centroids.row(c)).squaredNorm();
        min_d2[i] = std::min(min_d2[i], d2);
      }
    }
  }

  result.assignment.assign(n, 0);
  result.objective.reserve(iterations);
  const Eigen::VectorXf point_norms = points.rowwise().squaredNorm();
  std::vector<double> assigned_d2(n, 0.0);

  constexpr Eigen::Index kChunk = 4096;
  Eigen::MatrixXf cross;  // chunk x k scratch

  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXf centroid_norms =
        result.centroids.rowwise().squaredNorm();
    double objective = 0.0;
    for (Eigen::Index begin = 0; begin < n; begin += kChunk) {
      const Eigen::Index len = std::min(kChunk, n - begin);
      cross.noalias() =
          points.middleRows(begin, len) * result.centroids.transpose();
      for (Eigen::Index r = 0; r < len; ++r) {
        int best = 0;
        float best_d2 = std::numeric_limits<float>::max();
        for (int c = 0; c < k; ++c) {
          const float d2 = point_norms[begin + r] + centroid_norms[c] -
                           2.0f * cross(r, c);
          if (d2 < best_d2) {
            best_d2 = d2;
            best = c;
          }
        }
        result.assignment[begin + r] = best;
        assigned_d2[begin + r] = std::max(best_d2, 0.0f);
        objective += assigned_d2[begin + r];
      }
    }
    result.objective.push_back(objective);

    // The last iteration ends on the assignment pass, so the returned
    // assignment and objective describe the returned centroids.
    if (it + 1 == iterations) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, dim);
    std::vector<std::int64_t> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(result.assignment[i]) += points.row(i).cast<double>();
      ++counts[result.assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        result.centroids.row(c) =
            (sums.row(c) / double(counts[c])).cast<float>();
      } else {
        // Re-seed from the point farthest from its assigned centroid; its
        // own contribution drops to zero, keeping the objective monotone.
        Eigen::Index far = 0;
        for (Eigen::Index i = 1; i < n; ++i) {
          if (assigned_d2[i] > assigned_d2[far]) far = i;
        }
        result.centroids.row(c) = points.row(far);
        assigned_d2[far] = -1.0;  // consume, in case several clusters emptied
      }
    }
  }
  return result;
}

}  // namespace ccs::detail
