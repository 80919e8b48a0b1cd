#include "mprompt/synthetic.hpp"

#include <cmath>

namespace mprompt {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

Eigen::Matrix2d rot2(double angle) {
  return Eigen::Rotation2Dd(angle).toRotationMatrix();
}

constexpr double kOctaveScale[] = {12.0, 6.0, 3.0};
constexpr double kOctaveWeight[] = {0.5, 0.3, 0.2};

}  // namespace

double ProceduralTexture::lattice(std::int64_t ix, std::int64_t iy, int octave, int c) const {
  std::uint64_t h = splitmix(seed_);
  h = splitmix(h ^ static_cast<std::uint64_t>(ix));
  h = splitmix(h ^ static_cast<std::uint64_t>(iy));
  h = splitmix(h ^ static_cast<std::uint64_t>(octave * 3 + c));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Eigen::Vector3d ProceduralTexture::operator()(double x, double y) const {
  Eigen::Vector3d rgb = Eigen::Vector3d::Zero();
  for (int o = 0; o < 3; ++o) {
    const double u = x / kOctaveScale[o], v = y / kOctaveScale[o];
    const double fu = std::floor(u), fv = std::floor(v);
    const auto ix = static_cast<std::int64_t>(fu), iy = static_cast<std::int64_t>(fv);
    const double su = smoothstep(u - fu), sv = smoothstep(v - fv);
    for (int c = 0; c < 3; ++c) {
      const double top = (1 - su) * lattice(ix, iy, o, c) + su * lattice(ix + 1, iy, o, c);
      const double bottom = (1 - su) * lattice(ix, iy + 1, o, c) + su * lattice(ix + 1, iy + 1, o, c);
      rgb(c) += kOctaveWeight[o] * ((1 - sv) * top + sv * bottom);
    }
  }
  return 255.0 * rgb;
}

RgbImage render_texture(const ProceduralTexture& texture, int width, int height) {
  RgbImage img(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const Eigen::Vector3d c = texture(x, y);
      for (int k = 0; k < 3; ++k) img.at(x, y, k) = static_cast<std::uint8_t>(std::clamp(std::floor(c(k) + 0.5), 0.0, 255.0));
    }
  return img;
}

// ---------------------------------------------------------------------------

namespace {

double progress(const VideoDims& dims, int t) { return dims.frames > 1 ? static_cast<double>(t) / (dims.frames - 1) : 0.0; }

}  // namespace

Eigen::Vector2d LayeredScene::advect(const Eigen::Vector2d& p0, int t, bool on_disc) const {
  const double f = progress(dims, t);
  if (on_disc) return disc_center + f * disc_shift + rot2(f * disc_rotation) * (p0 - disc_center);
  const Eigen::Vector2d c(0.5 * dims.width, 0.5 * dims.height);
  return c + (1.0 + f * bg_zoom) * (rot2(f * bg_rotation) * (p0 - c)) + f * bg_shift;
}

bool LayeredScene::on_disc_at_start(const Eigen::Vector2d& p0) const { return (p0 - disc_center).norm() <= disc_radius; }

bool LayeredScene::covered_by_disc(const Eigen::Vector2d& p, int t) const {
  const double f = progress(dims, t);
  return (p - (disc_center + f * disc_shift)).norm() <= disc_radius;
}

Video LayeredScene::render() const {
  const ProceduralTexture bg(splitmix(seed));
  const ProceduralTexture fg(splitmix(seed + 1000));
  const Eigen::Vector2d c(0.5 * dims.width, 0.5 * dims.height);
  Video video;
  video.fps = 16.0;
  for (int t = 0; t < dims.frames; ++t) {
    const double f = progress(dims, t);
    const Eigen::Vector2d disc_now = disc_center + f * disc_shift;
    const Eigen::Matrix2d fg_inv = rot2(-f * disc_rotation);
    const Eigen::Matrix2d bg_inv = rot2(-f * bg_rotation) / (1.0 + f * bg_zoom);
    RgbImage frame(dims.width, dims.height);
    for (int y = 0; y < dims.height; ++y) {
      for (int x = 0; x < dims.width; ++x) {
        const Eigen::Vector2d p(x, y);
        Eigen::Vector3d color;
        if ((p - disc_now).norm() <= disc_radius) {
          const Eigen::Vector2d src = disc_center + fg_inv * (p - disc_now);
          color = fg(src.x(), src.y());
        } else {
          const Eigen::Vector2d src = c + bg_inv * (p - c - f * bg_shift);
          color = bg(src.x(), src.y());
        }
        for (int k = 0; k < 3; ++k)
          frame.at(x, y, k) = static_cast<std::uint8_t>(std::clamp(std::floor(color(k) + 0.5), 0.0, 255.0));
      }
    }
    video.frames.push_back(std::move(frame));
  }
  return video;
}

TrackSet LayeredScene::tracks(int stride) const {
  std::vector<Eigen::Vector2d> starts;
  for (int y = stride / 2; y < dims.height; y += stride)
    for (int x = stride / 2; x < dims.width; x += stride) starts.emplace_back(x, y);
  TrackSet out(static_cast<Index>(starts.size()), dims.frames, dims.width, dims.height);
  for (std::size_t n = 0; n < starts.size(); ++n) {
    const bool on_disc = on_disc_at_start(starts[n]);
    for (int t = 0; t < dims.frames; ++t) {
      const Eigen::Vector2d p = advect(starts[n], t, on_disc);
      const bool vis = out.in_frame(p) && (on_disc || !covered_by_disc(p, t));
      out.set(static_cast<Index>(n), t, p, vis);
    }
  }
  return out;
}

BenchmarkItem LayeredScene::item(int stride, const std::string& name) const {
  BenchmarkItem it;
  it.name = name;
  it.caption = "textured disc over a drifting textured background";
  it.gt_video = render();
  it.first_frame = it.gt_video.frames.front();
  it.gt_tracks = tracks(stride);
  return it;
}

std::vector<LayeredScene> standard_scenes(const VideoDims& dims) {
  std::vector<LayeredScene> scenes;
  const double w = dims.width, h = dims.height;
  const double scale = std::min(w, h) / 96.0;
  struct Params {
    double sx, sy, rot, zoom, cx, cy, r, dx, dy, drot;
  };
  const Params table[] = {
      {6.0, -3.0, 0.05, 0.04, 0.42, 0.54, 0.19, 14.0, 8.0, 0.35},
      {-5.0, 4.0, -0.04, -0.03, 0.60, 0.40, 0.17, -12.0, 10.0, -0.30},
      {3.0, 5.0, 0.08, 0.02, 0.50, 0.50, 0.22, 10.0, -10.0, 0.25},
      {-7.0, -2.0, 0.00, 0.06, 0.35, 0.62, 0.15, 16.0, -4.0, -0.40},
      {2.0, -6.0, -0.07, -0.05, 0.58, 0.58, 0.20, -9.0, -12.0, 0.30},
  };
  std::uint64_t seed = 11;
  for (const Params& p : table) {
    LayeredScene s;
    s.dims = dims;
    s.seed = seed++;
    s.bg_shift = Eigen::Vector2d(p.sx, p.sy) * scale;
    s.bg_rotation = p.rot;
    s.bg_zoom = p.zoom;
    s.disc_center = Eigen::Vector2d(p.cx * w, p.cy * h);
    s.disc_radius = p.r * std::min(w, h);
    s.disc_shift = Eigen::Vector2d(p.dx, p.dy) * scale;
    s.disc_rotation = p.drot;
    scenes.push_back(s);
  }
  return scenes;
}

DepthScene synthetic_depth_scene(int width, int height, double base_depth) {
  DepthScene scene;
  scene.intrinsics = {static_cast<double>(width), static_cast<double>(width), 0.5 * width, 0.5 * height};
  scene.depth.resize(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x - 0.5 * width) / width, v = (y - 0.5 * height) / height;
      const double bump = 0.6 * std::exp(-(u * u + v * v) / 0.02);
      scene.depth(y, x) = static_cast<float>(base_depth * (1.0 - 0.3 * v) - bump);
    }
  }
  return scene;
}

}  // namespace mprompt
