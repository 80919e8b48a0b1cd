#pragma once

#include <vector>

#include "mprompt/image.hpp"
#include "mprompt/track_core.hpp"

namespace mprompt {

struct NccTrackerParams {
  int patch = 11;          // odd side length of the template
  int search = 8;          // +/- pixels searched around the previous position
  double threshold = 0.5;  // best NCC below this marks the sample occluded
};

struct NccTrackResult {
  TrackSet tracks;
  int clamped_queries = 0;  // queries moved inward to keep the patch in frame
};

/// Patch tracker: each query's frame-0 template (zero-mean luma, bilinearly
/// sampled at the query) is matched by normalized cross-correlation over
/// integer offsets around the previous position, then refined to sub-pixel
/// by a parabola fit through the peak. Lost samples hold the previous
/// position with visibility 0 and the search continues from there.
NccTrackResult track_ncc(const Video& video, const std::vector<Eigen::Vector2d>& queries,
                         const NccTrackerParams& params = {});

// Frame-0 positions of every track, in track order.
std::vector<Eigen::Vector2d> start_points(const TrackSet& tracks);

}  // namespace mprompt
