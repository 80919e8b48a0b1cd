#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

namespace mprompt {

struct PinholeIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
};

/// World-to-camera rigid transform: X_cam = rotation * X_world + translation.
template <typename Scalar>
struct RigidPose {
  using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();

  Vector3 apply(const Vector3& world) const { return rotation * world + translation; }
  Vector3 center() const { return -rotation.transpose() * translation; }
  bool operator==(const RigidPose&) const = default;
};

using Pose = RigidPose<double>;
using CameraPath = std::vector<Pose>;

/// Metric depth raster (rows = y) with the intrinsics it was captured under.
struct DepthScene {
  PinholeIntrinsics intrinsics;
  Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> depth;

  int width() const { return static_cast<int>(depth.cols()); }
  int height() const { return static_cast<int>(depth.rows()); }
};

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> unproject_pixel(const PinholeIntrinsics& k, Scalar u, Scalar v, Scalar depth) {
  return {(u - Scalar(k.cx)) * depth / Scalar(k.fx), (v - Scalar(k.cy)) * depth / Scalar(k.fy), depth};
}

// Pinhole projection of a camera-frame point; caller checks z > 0.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 2, 1> project_point(const PinholeIntrinsics& k,
                                                            const Eigen::MatrixBase<Derived>& cam) {
  using Scalar = typename Derived::Scalar;
  return {Scalar(k.fx) * cam.x() / cam.z() + Scalar(k.cx), Scalar(k.fy) * cam.y() / cam.z() + Scalar(k.cy)};
}

// Orthonormal with determinant +1, both within `tol`.
template <typename Derived>
bool is_rotation(const Eigen::MatrixBase<Derived>& r, typename Derived::Scalar tol = 1e-6) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Matrix<Scalar, 3, 3> gram = r.transpose() * r;
  return (gram - Eigen::Matrix<Scalar, 3, 3>::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - Scalar(1)) <= tol;
}

}  // namespace mprompt
