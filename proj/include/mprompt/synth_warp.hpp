#pragma once

#include <vector>

#include "mprompt/image.hpp"
#include "mprompt/track_core.hpp"

namespace mprompt {

// Dense per-pixel displacement for one frame, rows = y.
struct DisplacementField {
  Eigen::ArrayXXd dx;
  Eigen::ArrayXXd dy;
};

/// Shepard interpolation (inverse squared distance) of the displacements of
/// tracks visible at frame t, anchored at their frame-0 positions and
/// restricted to the `neighbors` nearest anchors. Exact at anchors.
class TrackInterpolator {
 public:
  static constexpr int kDefaultNeighbors = 16;

  TrackInterpolator(const TrackSet& tracks, Index frame, int neighbors = kDefaultNeighbors);

  // Zero when no track is visible at the frame.
  Eigen::Vector2d operator()(const Eigen::Vector2d& at) const;
  bool empty() const { return anchors_.empty(); }

 private:
  void gather(const Eigen::Vector2d& at, std::vector<std::pair<double, int>>& best) const;

  std::vector<Eigen::Vector2d> anchors_;
  std::vector<Eigen::Vector2d> deltas_;
  int neighbors_;
  double cell_ = 1.0;
  Eigen::Vector2d origin_ = Eigen::Vector2d::Zero();
  int grid_w_ = 0;
  int grid_h_ = 0;
  std::vector<std::vector<int>> buckets_;
};

// Fields at integer pixel centres for every frame.
std::vector<DisplacementField> interpolate_field(const TrackSet& tracks, int width, int height);

/// Forward-warps `first_frame` along the interpolated field: each source
/// pixel splats bilinearly at its displaced location, accumulated colours are
/// weight-normalised, and pixels nothing lands on take the colour of the
/// nearest covered pixel. Frame 0 is the input unchanged.
Video render_warp(const RgbImage& first_frame, const TrackSet& tracks, const VideoDims& dims, double fps = 16.0);

// Diagnostic: first frame with each track drawn as a coloured trail
// (visible samples only) and a dot at its last visible position.
RgbImage render_overlay(const RgbImage& first_frame, const TrackSet& tracks);

}  // namespace mprompt
