#pragma once

#include <optional>

#include "mprompt/recording.hpp"
#include "mprompt/track_core.hpp"

namespace mprompt {

// Axis-aligned rectangle [x0, x1) x [y0, y1) in pixels.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool empty() const { return !(x1 > x0 && y1 > y0); }
  bool contains(const Eigen::Vector2d& p) const { return p.x() >= x0 && p.x() < x1 && p.y() >= y0 && p.y() < y1; }
};

struct PinSpec {
  Rect region;
  int stride = 16;
};

/// Square grid of drag tracks that follows the cursor while it is pressed.
struct GridSpec {
  int grid_side = 5;    // points per side
  double stride = 8.0;  // pixels between neighbouring grid points
  bool persist = false;
  std::optional<PinSpec> static_pins;
};

// Offsets of a grid_side x grid_side grid centred on the origin, row-major.
std::vector<Eigen::Vector2d> grid_offsets(int grid_side, double stride);

/// Each maximal run of pressed samples spawns a fresh grid_side^2 grid that
/// translates rigidly with the cursor. Outside its run a grid is invisible,
/// or, with `persist`, held at its first (before) / last (after) position
/// and visible. Grid points whose rounded position leaves the frame get
/// visibility 0. Static pins from `spec.static_pins` are appended last.
TrackSet expand_drag_to_grid(const MouseRecording& rec, const GridSpec& spec, const VideoDims& dims);

/// Appends constant, always-visible tracks at region.x0 + i*stride,
/// region.y0 + j*stride for every such point inside `region`.
TrackSet add_static_pins(const TrackSet& tracks, const Rect& region, int stride);

}  // namespace mprompt
