#pragma once

#include <span>

#include "mprompt/prompt_mouse.hpp"
#include "mprompt/track_core.hpp"

namespace mprompt {

/// Object motion confined to a region of the camera prompt.
struct ObjectLayer {
  TrackSet tracks;
  Rect region;
};

/// Adds object motion on top of camera motion. A camera track whose frame-0
/// position lies in a layer's region (first matching layer wins) takes the
/// displacement of the layer track nearest to it at frame 0, added frame by
/// frame; its visibility becomes the AND of both tracks. Other tracks pass
/// through unchanged.
TrackSet compose(const TrackSet& camera, std::span<const ObjectLayer> layers);
TrackSet compose(const TrackSet& camera, const TrackSet& object_tracks, const Rect& region);

/// Rescales source tracks to the target frame size, then keeps k of them.
TrackSet transfer_retarget(const TrackSet& source, int target_width, int target_height, Index k, std::uint64_t seed);

struct MagnifyParams {
  double alpha = 1.0;
  double sigma_space = 0.0;  // pixels, over frame-0 positions
  double sigma_time = 0.0;   // frames
};

/// Smooths displacements with a separable Gaussian (along each track in time,
/// then across tracks by frame-0 proximity; both kernels truncated at 3 sigma
/// and renormalized over visible samples) and rescales them by alpha about
/// the frame-0 positions. Visibility is preserved.
TrackSet magnify(const TrackSet& tracks, const MagnifyParams& params);

// Least-squares gain g minimising |d_out - g d_in|^2 over visible samples,
// where d are displacements from frame 0. Smoothing makes this differ from
// alpha in general.
double effective_gain(const TrackSet& original, const TrackSet& magnified);

}  // namespace mprompt
