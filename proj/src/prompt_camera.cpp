#include "mprompt/prompt_camera.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mprompt/errors.hpp"

namespace mprompt {

namespace {

constexpr double kNearPlane = 1e-9;

bool valid_depth(float d) { return std::isfinite(d) && d > 0.0f; }

// Pose after rotating the reference camera rig by `angle` about `axis`
// through `pivot`.
Pose rig_rotation(const Eigen::Vector3d& pivot, const Eigen::Vector3d& axis, double angle) {
  const Eigen::Matrix3d q = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  const Eigen::Vector3d center = pivot + q * (-pivot);
  Pose pose;
  pose.rotation = q.transpose();
  pose.translation = -pose.rotation * center;
  return pose;
}

CameraPath sweep(const SweepSpec& spec, const Eigen::Vector3d& axis) {
  if (spec.frames < 1) throw RangeError("camera path needs at least one frame", "frames");
  if (!spec.pivot.allFinite() || !std::isfinite(spec.total_angle)) throw RangeError("non-finite sweep", "pivot");
  const Eigen::Vector3d to_camera = -spec.pivot;
  const double radius = (to_camera - axis.dot(to_camera) * axis).norm();
  if (radius < 1e-9) throw DegenerateError("camera lies on the sweep axis (zero orbit radius)", "pivot");
  CameraPath path;
  path.reserve(static_cast<std::size_t>(spec.frames));
  for (int t = 0; t < spec.frames; ++t) {
    const double frac = spec.frames > 1 ? static_cast<double>(t) / (spec.frames - 1) : 0.0;
    path.push_back(t == 0 ? Pose{} : rig_rotation(spec.pivot, axis, frac * spec.total_angle));
  }
  return path;
}

}  // namespace

PointCloud unproject(const DepthScene& scene, int sample_stride) {
  if (sample_stride < 1) throw RangeError("sample stride must be >= 1", "sample_stride");
  const PinholeIntrinsics& k = scene.intrinsics;
  if (!(k.fx > 0) || !(k.fy > 0)) throw InvariantError("focal lengths must be positive", "intrinsics");

  PointCloud cloud;
  cloud.intrinsics = k;
  std::vector<Eigen::Vector3d> pts;
  std::vector<Eigen::Vector2i> src;
  for (int v = 0; v < scene.height(); v += sample_stride) {
    for (int u = 0; u < scene.width(); u += sample_stride) {
      const float d = scene.depth(v, u);
      if (!valid_depth(d)) {
        ++cloud.skipped_pixels;
        continue;
      }
      pts.push_back(unproject_pixel<double>(k, u, v, d));
      src.emplace_back(u, v);
    }
  }
  cloud.points.resize(3, static_cast<Index>(pts.size()));
  cloud.source_pixels.resize(2, static_cast<Index>(src.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    cloud.points.col(static_cast<Index>(i)) = pts[i];
    cloud.source_pixels.col(static_cast<Index>(i)) = src[i];
  }
  return cloud;
}

ZBufferParams default_zbuffer_params(const DepthScene& scene) {
  std::vector<float> depths;
  depths.reserve(static_cast<std::size_t>(scene.depth.size()));
  for (Index i = 0; i < scene.depth.size(); ++i)
    if (valid_depth(scene.depth.data()[i])) depths.push_back(scene.depth.data()[i]);
  if (depths.empty()) throw InvariantError("scene has no valid depth", "depth");
  const auto mid = depths.begin() + static_cast<std::ptrdiff_t>(depths.size() / 2);
  std::nth_element(depths.begin(), mid, depths.end());
  return {1, 0.02 * static_cast<double>(*mid)};
}

CameraPath make_orbit_path(const SweepSpec& spec) { return sweep(spec, Eigen::Vector3d(0.0, -1.0, 0.0)); }

CameraPath make_arc_path(const SweepSpec& spec) { return sweep(spec, Eigen::Vector3d(-1.0, 0.0, 0.0)); }

CameraPath mouse_to_camera_path(const MouseRecording& rec, const DepthScene& scene, const Eigen::Vector2d& anchor_pixel) {
  const int u = quantize(anchor_pixel.x());
  const int v = quantize(anchor_pixel.y());
  if (u < 0 || u >= scene.width() || v < 0 || v >= scene.height())
    throw InvariantError("anchor pixel lies outside the depth map", "anchor");
  const float d = scene.depth(v, u);
  if (!valid_depth(d)) throw InvariantError("anchor pixel has no valid depth", "anchor");

  const PinholeIntrinsics& k = scene.intrinsics;
  const Eigen::Vector3d anchor = unproject_pixel<double>(k, anchor_pixel.x(), anchor_pixel.y(), d);
  CameraPath path;
  path.reserve(rec.samples.size());
  for (const MouseSample& s : rec.samples) {
    const Eigen::Vector3d center(anchor.x() - (s.x - k.cx) * anchor.z() / k.fx,
                                 anchor.y() - (s.y - k.cy) * anchor.z() / k.fy, 0.0);
    Pose pose;
    pose.translation = -center;
    path.push_back(pose);
  }
  return path;
}

std::vector<std::uint8_t> zbuffer_visibility(const Eigen::Matrix2Xd& pixels, const Eigen::VectorXd& depth,
                                             const ZBufferParams& zb, int width, int height) {
  if (zb.neighborhood_radius < 0) throw RangeError("neighborhood radius must be >= 0", "neighborhood_radius");
  if (!(zb.depth_slack >= 0)) throw RangeError("depth slack must be >= 0", "depth_slack");
  const Index n = pixels.cols();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Nearest depth per pixel, then its (2r+1)^2 windowed minimum in two passes.
  Eigen::ArrayXXd nearest = Eigen::ArrayXXd::Constant(height, width, kInf);
  std::vector<std::uint8_t> candidate(static_cast<std::size_t>(n), 0);
  Eigen::Matrix2Xi cell(2, n);
  for (Index i = 0; i < n; ++i) {
    if (!(depth(i) > kNearPlane)) continue;
    const int qx = quantize(pixels(0, i));
    const int qy = quantize(pixels(1, i));
    if (qx < 0 || qx >= width || qy < 0 || qy >= height) continue;
    candidate[i] = 1;
    cell.col(i) << qx, qy;
    nearest(qy, qx) = std::min(nearest(qy, qx), depth(i));
  }
  const int r = zb.neighborhood_radius;
  Eigen::ArrayXXd rows_min(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      rows_min(y, x) = nearest.row(y).segment(std::max(0, x - r), std::min(width - 1, x + r) - std::max(0, x - r) + 1).minCoeff();
  Eigen::ArrayXXd window_min(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      window_min(y, x) = rows_min.col(x).segment(std::max(0, y - r), std::min(height - 1, y + r) - std::max(0, y - r) + 1).minCoeff();

  std::vector<std::uint8_t> visible(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i)
    if (candidate[i]) visible[i] = depth(i) > window_min(cell(1, i), cell(0, i)) + zb.depth_slack ? 0 : 1;
  return visible;
}

TrackSet project_tracks(const PointCloud& cloud, const CameraPath& path, const ZBufferParams& zb, const VideoDims& dims) {
  if (static_cast<int>(path.size()) != dims.frames) {
    throw ShapeError("camera path has " + std::to_string(path.size()) + " poses for " + std::to_string(dims.frames) +
                         " frames",
                     "path");
  }
  const Index n = cloud.size();
  TrackSet tracks(n, dims.frames, dims.width, dims.height);
  Eigen::Matrix2Xd pixels(2, n);
  Eigen::VectorXd depth(n);
  for (int t = 0; t < dims.frames; ++t) {
    const Eigen::Matrix3Xd cam = (path[t].rotation * cloud.points).colwise() + path[t].translation;
    for (Index i = 0; i < n; ++i) {
      depth(i) = cam(2, i);
      if (depth(i) > kNearPlane) {
        pixels.col(i) = project_point(cloud.intrinsics, cam.col(i));
      } else if (t > 0) {
        pixels.col(i) << tracks.x(i, t - 1), tracks.y(i, t - 1);
      } else {
        pixels.col(i) = cloud.source_pixels.col(i).cast<double>();
      }
    }
    const auto vis = zbuffer_visibility(pixels, depth, zb, dims.width, dims.height);
    for (Index i = 0; i < n; ++i) tracks.set(i, t, pixels.col(i), vis[i] != 0);
  }
  return tracks;
}

CameraPathKind parse_camera_path_kind(const std::string& name) {
  if (name == "orbit") return CameraPathKind::orbit;
  if (name == "arc") return CameraPathKind::arc;
  if (name == "mouse") return CameraPathKind::mouse;
  throw ParseError("unknown camera path '" + name + "' (expected orbit, arc or mouse)", "path");
}

TrackSet expand_camera(const DepthScene& scene, const CameraPromptSpec& spec, int frames, const MouseRecording* recording) {
  const Eigen::Vector2d anchor = spec.anchor.value_or(Eigen::Vector2d(0.5 * (scene.width() - 1), 0.5 * (scene.height() - 1)));
  CameraPath path;
  if (spec.path == CameraPathKind::mouse) {
    if (recording == nullptr) throw InvariantError("mouse-driven camera path needs a recording", "recording");
    if (recording->n_frames() != frames)
      throw ShapeError("recording has " + std::to_string(recording->n_frames()) + " samples for " + std::to_string(frames) +
                           " frames",
                       "recording");
    path = mouse_to_camera_path(*recording, scene, anchor);
  } else {
    const int u = quantize(anchor.x()), v = quantize(anchor.y());
    if (u < 0 || u >= scene.width() || v < 0 || v >= scene.height())
      throw InvariantError("anchor pixel lies outside the depth map", "anchor");
    if (!valid_depth(scene.depth(v, u))) throw InvariantError("anchor pixel has no valid depth", "anchor");
    SweepSpec sweep_spec;
    sweep_spec.pivot = unproject_pixel<double>(scene.intrinsics, anchor.x(), anchor.y(), scene.depth(v, u));
    sweep_spec.total_angle = spec.angle_degrees * std::numbers::pi / 180.0;
    sweep_spec.frames = frames;
    path = spec.path == CameraPathKind::orbit ? make_orbit_path(sweep_spec) : make_arc_path(sweep_spec);
  }
  const VideoDims dims{frames, scene.width(), scene.height()};
  const TrackSet all = project_tracks(unproject(scene, spec.sample_stride), path, default_zbuffer_params(scene), dims);
  if (spec.max_tracks <= 0 || all.n_tracks() <= spec.max_tracks) return all;
  return subsample_tracks(all, spec.max_tracks, spec.seed);
}

}  // namespace mprompt
