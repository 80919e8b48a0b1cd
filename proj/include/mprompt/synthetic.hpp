#pragma once

#include <cstdint>
#include <vector>

#include "mprompt/camera.hpp"
#include "mprompt/eval.hpp"

namespace mprompt {

// Smooth multi-octave value noise; deterministic per seed, defined on the
// whole plane. Returns values in [0, 255] per channel.
class ProceduralTexture {
 public:
  explicit ProceduralTexture(std::uint64_t seed) : seed_(seed) {}
  Eigen::Vector3d operator()(double x, double y) const;

 private:
  double lattice(std::int64_t ix, std::int64_t iy, int octave, int c) const;
  std::uint64_t seed_;
};

RgbImage render_texture(const ProceduralTexture& texture, int width, int height);

/// Two-layer scene with known motion: a textured background under a global
/// similarity transform about the frame centre, and a textured disc that
/// translates and spins on top of it.
struct LayeredScene {
  VideoDims dims{16, 96, 96};
  std::uint64_t seed = 1;
  // Background motion at the last frame (linear ramp in between).
  Eigen::Vector2d bg_shift{6.0, -3.0};
  double bg_rotation = 0.05;  // radians
  double bg_zoom = 0.04;      // relative scale change
  // Foreground disc.
  Eigen::Vector2d disc_center{40.0, 52.0};
  double disc_radius = 18.0;
  Eigen::Vector2d disc_shift{14.0, 8.0};
  double disc_rotation = 0.35;

  // Where a frame-0 point ends up at frame t, and whether it is visible there.
  Eigen::Vector2d advect(const Eigen::Vector2d& p0, int t, bool on_disc) const;
  bool on_disc_at_start(const Eigen::Vector2d& p0) const;
  bool covered_by_disc(const Eigen::Vector2d& p, int t) const;

  Video render() const;
  // Ground-truth tracks from a regular grid with the given stride.
  TrackSet tracks(int stride) const;
  BenchmarkItem item(int stride, const std::string& name) const;
};

// Five scenes with distinct textures and motion parameters.
std::vector<LayeredScene> standard_scenes(const VideoDims& dims = {16, 96, 96});

// Smooth synthetic depth map: a tilted ground plane with a bump.
DepthScene synthetic_depth_scene(int width, int height, double base_depth = 4.0);

}  // namespace mprompt
