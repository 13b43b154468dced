#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>

namespace ccs {

inline constexpr int kDescriptorDim = 128;

// Local feature descriptor. Fixed 128-dim single precision, matching the
// on-disk layout everywhere a descriptor is serialized.
using Descriptor = Eigen::Matrix<float, kDescriptorDim, 1>;

inline bool is_finite(const Descriptor& d) {
  return d.allFinite();
}

}  // namespace ccs
