#pragma once

#include <optional>
#include <string>

#include "mprompt/camera.hpp"
#include "mprompt/recording.hpp"
#include "mprompt/track_core.hpp"

namespace mprompt {

/// Scene points in the reference camera frame (which doubles as the world
/// frame), each tagged with the pixel it was lifted from.
struct PointCloud {
  PinholeIntrinsics intrinsics;
  Eigen::Matrix3Xd points;
  Eigen::Matrix2Xi source_pixels;
  int skipped_pixels = 0;  // pixels with non-positive or non-finite depth

  Index size() const { return points.cols(); }
};

// Lifts every sample_stride-th pixel (in x and y) to 3D.
PointCloud unproject(const DepthScene& scene, int sample_stride = 1);

/// Occlusion test parameters. Projections are quantized to the pixel grid;
/// a point is occluded when some other in-frame point within the
/// (2*neighborhood_radius+1)^2 square is nearer by more than depth_slack.
struct ZBufferParams {
  int neighborhood_radius = 1;
  double depth_slack = 0.02;
};

// neighborhood_radius = 1, depth_slack = 2% of the scene's median valid depth.
ZBufferParams default_zbuffer_params(const DepthScene& scene);

/// Rigid sweep of the reference camera about an axis through `pivot`.
struct SweepSpec {
  Eigen::Vector3d pivot{0.0, 0.0, 1.0};
  double total_angle = 0.0;  // radians, spread linearly over the frames
  int frames = 80;
};

// Camera circles the vertical axis through the pivot (world up is -y);
// positive angles move the camera to the right. Pose 0 is the reference.
CameraPath make_orbit_path(const SweepSpec& spec);

// Camera swings about the horizontal axis through the pivot; positive
// angles raise the camera. Pose 0 is the reference.
CameraPath make_arc_path(const SweepSpec& spec);

/// Translates the camera within its reference image plane (z = 0, fixed
/// orientation) so the scene point under `anchor_pixel` projects onto the
/// cursor at every frame.
CameraPath mouse_to_camera_path(const MouseRecording& rec, const DepthScene& scene, const Eigen::Vector2d& anchor_pixel);

/// Projects every cloud point through every pose. Points behind the camera,
/// outside the frame, or occluded per `zb` are invisible; occluded and
/// off-screen points keep their projected positions, behind-camera points
/// hold their last position.
TrackSet project_tracks(const PointCloud& cloud, const CameraPath& path, const ZBufferParams& zb, const VideoDims& dims);

// Visibility for one frame of already-projected points. `depth` <= 0 marks a
// point behind the camera.
std::vector<std::uint8_t> zbuffer_visibility(const Eigen::Matrix2Xd& pixels, const Eigen::VectorXd& depth,
                                             const ZBufferParams& zb, int width, int height);

enum class CameraPathKind { orbit, arc, mouse };

// End-to-end camera prompt: unproject the depth map, build the path, project
// with z-buffered visibility, then keep at most `max_tracks` random tracks.
struct CameraPromptSpec {
  CameraPathKind path = CameraPathKind::orbit;
  double angle_degrees = 30.0;
  int sample_stride = 2;
  Index max_tracks = 1024;  // 0 keeps every track
  // Pixel whose 3D point is the sweep pivot (or the mouse anchor); defaults
  // to the image centre.
  std::optional<Eigen::Vector2d> anchor;
  std::uint64_t seed = 0;
};

CameraPathKind parse_camera_path_kind(const std::string& name);

TrackSet expand_camera(const DepthScene& scene, const CameraPromptSpec& spec, int frames,
                       const MouseRecording* recording = nullptr);

}  // namespace mprompt
