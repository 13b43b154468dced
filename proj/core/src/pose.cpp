#include "ccs/pose.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ccs {

namespace {

// Similarity transform moving the centroid to the origin and the mean
// distance to sqrt(dim), as conditioning for the DLT system.
template <int Dim>
Eigen::Matrix<double, Dim + 1, Dim + 1> normalizer(
    const std::vector<Eigen::Matrix<double, Dim, 1>>& pts) {
  Eigen::Matrix<double, Dim, 1> centroid =
      Eigen::Matrix<double, Dim, 1>::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= double(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= double(pts.size());
  const double scale =
      mean_dist > 1e-15 ? std::sqrt(double(Dim)) / mean_dist : 1.0;
  Eigen::Matrix<double, Dim + 1, Dim + 1> t =
      Eigen::Matrix<double, Dim + 1, Dim + 1>::Identity();
  t.template topLeftCorner<Dim, Dim>() *= scale;
  t.template topRightCorner<Dim, 1>() = -scale * centroid;
  return t;
}

}  // namespace

ProjectionMatrix dlt6(std::span<const Correspondence2d3d> correspondences) {
  const auto n = correspondences.size();
  if (n < 6) {
    throw std::invalid_argument("dlt6: need at least 6 correspondences");
  }

  std::vector<Eigen::Vector2d> pixels;
  std::vector<Eigen::Vector3d> points;
  pixels.reserve(n);
  points.reserve(n);
  for (const auto& c : correspondences) {
    pixels.push_back(c.pixel);
    points.push_back(c.point);
  }
  const Eigen::Matrix3d t2 = normalizer<2>(pixels);
  const Eigen::Matrix4d t3 = normalizer<3>(points);

  Eigen::MatrixXd a(2 * n, 12);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d x = t2 * pixels[i].homogeneous();
    const Eigen::Vector4d bigx = t3 * points[i].homogeneous();
    // Rows [0, -w X^T, v X^T] and [w X^T, 0, -u X^T].
    a.row(2 * i).setZero();
    a.row(2 * i).segment<4>(4) = -x.z() * bigx.transpose();
    a.row(2 * i).segment<4>(8) = x.y() * bigx.transpose();
    a.row(2 * i + 1).setZero();
    a.row(2 * i + 1).segment<4>(0) = x.z() * bigx.transpose();
    a.row(2 * i + 1).segment<4>(8) = -x.x() * bigx.transpose();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // One vanishing singular value is the solution; a second means the
  // configuration does not determine the camera.
  if (sv[10] < 1e-9 * sv[0]) {
    throw DegenerateGeometry("dlt6: degenerate point configuration");
  }

  const Eigen::VectorXd h = svd.matrixV().col(11);
  Eigen::Matrix<double, 3, 4> p_norm;
  p_norm.row(0) = h.segment<4>(0).transpose();
  p_norm.row(1) = h.segment<4>(4).transpose();
  p_norm.row(2) = h.segment<4>(8).transpose();

  ProjectionMatrix p = t2.inverse() * p_norm * t3;
  p /= p.norm();
  Eigen::Index mr = 0, mc = 0;
  p.cwiseAbs().maxCoeff(&mr, &mc);
  if (p(mr, mc) < 0) p = -p;
  return p;
}

Eigen::Vector2d project(const ProjectionMatrix& theta,
                        const Eigen::Vector3d& point) {
  const Eigen::Vector3d h = theta * point.homogeneous();
  if (std::abs(h.z()) < 1e-12 * h.norm()) {
    throw DegenerateGeometry("project: point at infinity");
  }
  return h.hnormalized();
}

double reproj_error(const ProjectionMatrix& theta, const Eigen::Vector2d& pixel,
                    const Eigen::Vector3d& point) {
  const Eigen::Vector3d h = theta * point.homogeneous();
  if (std::abs(h.z()) < 1e-12 * h.norm()) {
    return std::numeric_limits<double>::infinity();
  }
  return (h.hnormalized() - pixel).norm();
}

Eigen::Vector3d camera_center(const ProjectionMatrix& theta) {
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(theta,
                                                    Eigen::ComputeFullV);
  const Eigen::Vector4d c = svd.matrixV().col(3);
  if (std::abs(c.w()) < 1e-12 * c.norm()) {
    throw DegenerateGeometry("camera_center: camera at infinity");
  }
  return c.hnormalized();
}

}  // namespace ccs
