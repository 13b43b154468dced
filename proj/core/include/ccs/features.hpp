#pragma once

#include <Eigen/Core>

#include <vector>

#include "ccs/descriptor.hpp"

namespace ccs {

// One detected keypoint of a query image.
struct QueryFeature {
  Eigen::Vector2f pixel;
  Descriptor descriptor;
};

using QueryImage = std::vector<QueryFeature>;

}  // namespace ccs
