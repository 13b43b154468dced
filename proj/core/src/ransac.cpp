#include "ccs/ransac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ccs {

double sprt_threshold(double delta, double epsilon, double t_m, int m_s) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("sprt_threshold: delta outside (0, 1)");
  }
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("sprt_threshold: epsilon outside (0, 1]");
  }
  const double c = (1.0 - delta) * std::log((1.0 - delta) / (1.0 - epsilon)) +
                   delta * std::log(delta / epsilon);
  const double a0 = t_m * c / double(m_s) + 1.0;
  if (!std::isfinite(a0)) return a0;  // epsilon == 1 drives C to +inf

  // Solve A = a0 + log A, i.e. the root of g(A) = A - log A - a0 on
  // [1, inf) where g is increasing from g(1) = 1 - a0 <= 0. The naive
  // fixed-point iteration stalls when epsilon ~ delta pushes a0 toward 1
  // (map derivative 1/A -> 1), so bracket and bisect instead.
  if (a0 <= 1.0) return 1.0;
  double lo = 1.0;
  double hi = a0 + 1.0;
  while (hi - std::log(hi) < a0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid - std::log(mid) < a0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double required_samples(double epsilon, int sample_size, double threshold,
                        double cap) {
  if (epsilon <= 0.0) return cap;
  const double p_good = std::pow(epsilon, sample_size);
  const double denom = p_good * (1.0 - 1.0 / threshold);
  if (!(denom > 0.0) || !std::isfinite(denom)) return cap;
  return std::min(1.0 / denom, cap);
}

namespace {

struct VerifyEntry {
  Eigen::Vector2d pixel;
  std::vector<Eigen::Vector3d> positions;  // ascending match distance
  std::vector<std::uint32_t> point_ids;
  std::uint32_t query_index = 0;
};

// delta must stay below epsilon for the likelihood factors to point the
// right way; the estimates themselves are kept unclamped.
double effective_delta(double delta, double epsilon) {
  return std::min(delta, 0.95 * epsilon);
}

}  // namespace

PoseResult ransac_1m(const CorrespondenceSet& set, const RansacConfig& config,
                     SprtState* state_out) {
  if (config.sample_size != 6) {
    throw std::invalid_argument("ransac_1m: sample size is fixed at 6");
  }
  const int s = config.sample_size;
  const auto n_h = set.n_h();
  const auto n_q = set.n_q();

  PoseResult result;
  if (state_out) *state_out = SprtState{};
  if (n_h < static_cast<std::size_t>(s)) return result;

  std::vector<Eigen::Vector2d> hyp_px(n_h);
  std::vector<Eigen::Vector3d> hyp_pt(n_h);
  for (std::size_t i = 0; i < n_h; ++i) {
    const VerificationRecord& rec = set.verification[set.hypothesis[i]];
    hyp_px[i] = rec.pixel.cast<double>();
    hyp_pt[i] = rec.candidates.front().position.cast<double>();
  }
  std::vector<VerifyEntry> verify(n_q);
  for (std::size_t i = 0; i < n_q; ++i) {
    const VerificationRecord& rec = set.verification[i];
    verify[i].pixel = rec.pixel.cast<double>();
    verify[i].query_index = rec.query_index;
    for (const ScoredCandidate& c : rec.candidates) {
      verify[i].positions.push_back(c.position.cast<double>());
      verify[i].point_ids.push_back(c.point_id);
    }
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> draw(0, n_h - 1);

  const bool fast = config.mode == RansacConfig::Mode::kFastSprt;
  const double cap = double(config.max_iterations);
  double epsilon = double(s) / double(n_h);
  double delta = config.delta_init;
  double threshold = 0.0;
  double budget = 0.0;
  if (fast) {
    threshold = sprt_threshold(effective_delta(delta, epsilon), epsilon,
                               config.t_m, config.m_s);
    budget = required_samples(epsilon, s, threshold, cap);
  }

  long best_score = -1;
  ProjectionMatrix best_theta = ProjectionMatrix::Zero();
  std::vector<InlierMatch> best_inliers;
  std::uint32_t rejections = 0;

  std::array<std::size_t, 6> sample{};
  std::vector<std::uint32_t> order(n_h);
  std::vector<Correspondence2d3d> minimal(s);

  std::uint32_t iter = 0;
  for (;;) {
    if (fast) {
      if (double(iter) > budget || iter >= config.max_iterations) break;
    } else {
      if (iter >= config.fixed_iterations || iter >= config.max_iterations)
        break;
    }
    ++iter;

    for (int k = 0; k < s; ++k) {
      for (;;) {
        const std::size_t pick = draw(rng);
        if (std::find(sample.begin(), sample.begin() + k, pick) ==
            sample.begin() + k) {
          sample[k] = pick;
          break;
        }
      }
    }
    ProjectionMatrix theta;
    try {
      for (int k = 0; k < s; ++k) {
        minimal[k] = {hyp_px[sample[k]], hyp_pt[sample[k]]};
      }
      theta = dlt6(minimal);
    } catch (const DegenerateGeometry&) {
      continue;  // resample; the iteration still counts against the budget
    }

    if (fast) {
      // Wald's sequential test over the strict pairs in a fresh random
      // order (lazy Fisher-Yates: only visited entries are shuffled).
      const double eps_l = std::min(epsilon, 1.0 - 1e-12);
      const double del_l = effective_delta(delta, eps_l);
      const double factor_in = del_l / eps_l;
      const double factor_out = (1.0 - del_l) / (1.0 - eps_l);
      for (std::size_t i = 0; i < n_h; ++i) order[i] = std::uint32_t(i);
      double lambda = 1.0;
      std::size_t tested = 0, consistent = 0;
      bool rejected = false;
      for (std::size_t k = 0; k < n_h; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, n_h - 1);
        std::swap(order[k], order[pick(rng)]);
        const std::uint32_t idx = order[k];
        const bool in =
            reproj_error(theta, hyp_px[idx], hyp_pt[idx]) <=
            config.inlier_threshold_px;
        ++tested;
        consistent += in ? 1 : 0;
        lambda *= in ? factor_in : factor_out;
        if (lambda > threshold) {
          rejected = true;
          break;
        }
      }
      if (rejected) {
        ++rejections;
        const double f_obs = double(consistent) / double(tested);
        double delta_hat =
            (delta * double(rejections - 1) + f_obs) / double(rejections);
        delta_hat = std::clamp(delta_hat, 1e-4, 0.95);
        if (std::abs(delta - delta_hat) > 0.05) {
          delta = delta_hat;
          threshold = sprt_threshold(effective_delta(delta, epsilon), epsilon,
                                     config.t_m, config.m_s);
        }
        continue;
      }
    }

    long score = 0;
    std::vector<InlierMatch> inliers;
    for (const VerifyEntry& entry : verify) {
      for (std::size_t j = 0; j < entry.positions.size(); ++j) {
        if (reproj_error(theta, entry.pixel, entry.positions[j]) <=
            config.inlier_threshold_px) {
          ++score;
          inliers.push_back({entry.query_index, entry.point_ids[j]});
          break;  // lowest-distance consistent candidate wins
        }
      }
    }

    if (score >= best_score) {
      best_score = score;
      best_theta = theta;
      best_inliers = std::move(inliers);
      if (fast) {
        epsilon = std::clamp(
            config.epsilon_update_factor * double(score) / double(n_q), 1e-6,
            1.0);
        threshold = sprt_threshold(effective_delta(delta, epsilon), epsilon,
                                   config.t_m, config.m_s);
        budget = required_samples(epsilon, s, threshold, cap);
      }
    }
  }

  if (state_out) {
    state_out->epsilon = epsilon;
    state_out->delta = delta;
    state_out->threshold = threshold;
    state_out->required = budget;
    state_out->rejections = rejections;
  }

  result.iterations = iter;
  result.sprt_rejections = rejections;
  if (best_score < 0) return result;

  result.valid = true;
  result.matrix = best_theta;
  result.inliers = std::move(best_inliers);
  try {
    result.center = camera_center(best_theta);
  } catch (const DegenerateGeometry&) {
    result.center = Eigen::Vector3d::Zero();
  }
  return result;
}

}  // namespace ccs
