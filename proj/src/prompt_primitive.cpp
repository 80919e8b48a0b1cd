#include "mprompt/prompt_primitive.hpp"

#include <cmath>
#include <numbers>

#include "mprompt/random.hpp"

namespace mprompt {

namespace {

void check_sphere(const SphereSpec& sphere) {
  if (!(sphere.radius > 0.0)) throw RangeError("sphere radius must be positive", "radius");
  if (sphere.n_points < 1) throw RangeError("sphere needs at least one point", "n_points");
}

}  // namespace

Eigen::Vector3d lift_to_sphere(const Eigen::Vector2d& cursor, const SphereSpec& sphere) {
  Eigen::Vector2d d = cursor - sphere.center;
  const double r = sphere.radius;
  const double len = d.norm();
  if (len >= r) return {d.x() * r / len, d.y() * r / len, 0.0};
  return {d.x(), d.y(), std::sqrt(r * r - d.squaredNorm())};
}

RotationList mouse_to_rotations(const MouseRecording& rec, const SphereSpec& sphere) {
  check_sphere(sphere);
  RotationList rotations(rec.samples.size(), Eigen::Matrix3d::Identity());
  Eigen::Matrix3d held = Eigen::Matrix3d::Identity();
  Eigen::Vector3d anchor = Eigen::Vector3d::Zero();
  bool dragging = false;
  for (std::size_t t = 0; t < rec.samples.size(); ++t) {
    const MouseSample& s = rec.samples[t];
    if (s.pressed) {
      if (!dragging) {
        anchor = lift_to_sphere(s.position(), sphere);
        dragging = true;
      }
      rotations[t] = rotation_between(anchor, lift_to_sphere(s.position(), sphere)) * held;
    } else {
      if (dragging) {
        held = rotations[t - 1];
        dragging = false;
      }
      rotations[t] = held;
    }
  }
  return rotations;
}

std::vector<Eigen::Vector3d> sample_sphere_surface(const SphereSpec& sphere) {
  check_sphere(sphere);
  Rng rng(sphere.seed);
  std::vector<Eigen::Vector3d> points;
  points.reserve(static_cast<std::size_t>(sphere.n_points));
  for (int i = 0; i < sphere.n_points; ++i) {
    const double z = 2.0 * uniform01(rng) - 1.0;
    const double azimuth = 2.0 * std::numbers::pi * uniform01(rng);
    const double ring = std::sqrt(std::max(0.0, 1.0 - z * z));
    points.push_back(sphere.radius * Eigen::Vector3d(ring * std::cos(azimuth), ring * std::sin(azimuth), z));
  }
  return points;
}

TrackSet sphere_tracks(const RotationList& rotations, const SphereSpec& sphere, const VideoDims& dims) {
  if (static_cast<int>(rotations.size()) != dims.frames) {
    throw ShapeError("got " + std::to_string(rotations.size()) + " rotations for " + std::to_string(dims.frames) +
                         " frames",
                     "rotations");
  }
  const auto surface = sample_sphere_surface(sphere);
  TrackSet tracks(static_cast<Index>(surface.size()), dims.frames, dims.width, dims.height);
  for (int t = 0; t < dims.frames; ++t) {
    for (std::size_t n = 0; n < surface.size(); ++n) {
      const Eigen::Vector3d q = rotations[t] * surface[n];
      const Eigen::Vector2d p = sphere.center + q.head<2>();
      tracks.set(static_cast<Index>(n), t, p, q.z() >= 0.0 && tracks.in_frame(p));
    }
  }
  return tracks;
}

}  // namespace mprompt
