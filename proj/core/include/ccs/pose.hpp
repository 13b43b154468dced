#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ccs/errors.hpp"

namespace ccs {

// 3x4 projection matrix, Frobenius norm 1, sign fixed so the entry of
// largest magnitude is positive.
using ProjectionMatrix = Eigen::Matrix<double, 3, 4>;

struct Correspondence2d3d {
  Eigen::Vector2d pixel;
  Eigen::Vector3d point;
};

// Direct linear transform from n >= 6 correspondences, solved on
// Hartley-normalized coordinates via SVD of the stacked 2n x 12 system.
// Throws DegenerateGeometry when the configuration leaves the solution
// ambiguous (e.g. collinear or coplanar points).
ProjectionMatrix dlt6(std::span<const Correspondence2d3d> correspondences);

// Throws DegenerateGeometry when the point projects to infinity (w ~ 0).
Eigen::Vector2d project(const ProjectionMatrix& theta,
                        const Eigen::Vector3d& point);

// Euclidean pixel distance between `pixel` and the projection of `point`.
// Returns +infinity for points at infinity, so callers can treat them as
// non-inliers without branching.
double reproj_error(const ProjectionMatrix& theta, const Eigen::Vector2d& pixel,
                    const Eigen::Vector3d& point);

// Dehomogenized right null-space of theta. Throws DegenerateGeometry for a
// camera at infinity.
Eigen::Vector3d camera_center(const ProjectionMatrix& theta);

struct InlierMatch {
  std::uint32_t query_index = 0;
  std::uint32_t point_id = 0;
};

struct PoseResult {
  bool valid = false;
  ProjectionMatrix matrix = ProjectionMatrix::Zero();
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  std::vector<InlierMatch> inliers;
  std::uint32_t iterations = 0;        // hypothesis samples drawn
  std::uint32_t sprt_rejections = 0;   // hypotheses rejected mid-verification
};

}  // namespace ccs
