#pragma once

#include <cstdint>

#include "ccs/cascade.hpp"
#include "ccs/pose.hpp"

namespace ccs {

struct RansacConfig {
  enum class Mode { kFastSprt, kFixedIterations };

  Mode mode = Mode::kFastSprt;
  std::uint32_t fixed_iterations = 5000;  // kFixedIterations only
  std::uint32_t max_iterations = 100000;  // hard cap in either mode
  int sample_size = 6;                    // the solver is a 6-point DLT
  double inlier_threshold_px = 4.0;
  double delta_init = 0.01;  // prior consistency rate of a bad hypothesis
  double t_m = 200.0;        // hypothesis cost in verification units
  int m_s = 1;               // models per sample
  // Scales the inlier-rate re-estimate C*/N_q after each accepted model.
  double epsilon_update_factor = 1.0;
  std::uint64_t seed = 0;
};

// Adaptive test state, exposed for inspection and tests.
struct SprtState {
  double epsilon = 0.0;   // inlier rate estimate
  double delta = 0.0;     // bad-hypothesis consistency estimate
  double threshold = 0.0; // likelihood-ratio decision bound A
  double required = 0.0;  // remaining sample budget
  std::uint32_t rejections = 0;
};

// Decision bound A(delta, epsilon): the fixed point of
// A = t_m * C / m_s + 1 + log(A) with
// C = (1 - delta) log((1 - delta)/(1 - epsilon)) + delta log(delta/epsilon).
// Requires 0 < delta < 1 and 0 < epsilon <= 1; throws if the iteration has
// not converged to 1e-12 within 100 steps.
double sprt_threshold(double delta, double epsilon, double t_m = 200.0,
                      int m_s = 1);

// Expected samples until a good hypothesis survives: 1/(eps^s (1 - 1/A)),
// capped at `cap` (also the result for epsilon == 0 or overflow).
double required_samples(double epsilon, int sample_size, double threshold,
                        double cap);

// Hypothesize-and-verify over a correspondence set: hypotheses are drawn
// from the strict 1-1 pairs and fitted with dlt6; a candidate model is
// scored against the 1-many lists, where a query counts as an inlier if any
// of its candidates reprojects within the threshold. In fast mode each
// hypothesis is first screened by Wald's sequential probability ratio test
// over the strict pairs in random order, and the sample budget adapts to the
// best score so far.
PoseResult ransac_1m(const CorrespondenceSet& set, const RansacConfig& config,
                     SprtState* state_out = nullptr);

}  // namespace ccs
