#pragma once

#include <Eigen/Geometry>
#include <cstdint>
#include <vector>

#include "mprompt/errors.hpp"
#include "mprompt/recording.hpp"
#include "mprompt/track_core.hpp"

namespace mprompt {

/// A sphere the user spins with the mouse. Screen axes: x right, y down,
/// z toward the viewer; the visible hemisphere is z >= 0.
struct SphereSpec {
  Eigen::Vector2d center{64.0, 64.0};
  double radius = 32.0;
  int n_points = 512;
  std::uint64_t seed = 0;
};

using RotationList = std::vector<Eigen::Matrix3d>;

// Lifts a screen point onto the front hemisphere, relative to the centre.
// Points outside the disc are first clamped to its rim.
Eigen::Vector3d lift_to_sphere(const Eigen::Vector2d& cursor, const SphereSpec& sphere);

// Rotation about axis a x b taking direction a onto direction b. Throws
// DegenerateError for antipodal inputs.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 3> rotation_between(const Eigen::MatrixBase<Derived>& a,
                                                               const Eigen::MatrixBase<Derived>& b);

/// Per-frame sphere orientation driven by drags. While the cursor is pressed
/// the frame rotation maps the surface point under the press-start cursor
/// onto the surface point under the current cursor, composed onto whatever
/// orientation the previous drags left behind. Unpressed frames hold.
RotationList mouse_to_rotations(const MouseRecording& rec, const SphereSpec& sphere);

// n_points uniform surface samples, relative to the centre (uniform z,
// uniform azimuth).
std::vector<Eigen::Vector3d> sample_sphere_surface(const SphereSpec& sphere);

/// Rotates the surface samples per frame and projects them orthographically
/// about sphere.center; back-facing samples (z < 0) are occluded.
TrackSet sphere_tracks(const RotationList& rotations, const SphereSpec& sphere, const VideoDims& dims);

// ---------------------------------------------------------------------------

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 3> rotation_between(const Eigen::MatrixBase<Derived>& a,
                                                               const Eigen::MatrixBase<Derived>& b) {
  using Scalar = typename Derived::Scalar;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  const Vector3 u = a.normalized();
  const Vector3 v = b.normalized();
  const Vector3 axis = u.cross(v);
  const Scalar sin_angle = axis.norm();
  const Scalar cos_angle = u.dot(v);
  if (sin_angle <= Scalar(1e-12)) {
    if (cos_angle > 0) return Eigen::Matrix<Scalar, 3, 3>::Identity();
    throw DegenerateError("antipodal drag: rotation axis is ambiguous", "cursor");
  }
  return Eigen::AngleAxis<Scalar>(std::atan2(sin_angle, cos_angle), axis / sin_angle).toRotationMatrix();
}

}  // namespace mprompt
