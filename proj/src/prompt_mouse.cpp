#include "mprompt/prompt_mouse.hpp"

#include <cmath>

#include "mprompt/errors.hpp"

namespace mprompt {

std::vector<Eigen::Vector2d> grid_offsets(int grid_side, double stride) {
  if (grid_side < 1) throw RangeError("grid_side must be >= 1", "grid_side");
  if (!(stride >= 1.0)) throw RangeError("stride must be >= 1", "stride");
  std::vector<Eigen::Vector2d> offsets;
  offsets.reserve(static_cast<std::size_t>(grid_side) * grid_side);
  const double half = 0.5 * (grid_side - 1);
  for (int j = 0; j < grid_side; ++j)
    for (int i = 0; i < grid_side; ++i) offsets.emplace_back((i - half) * stride, (j - half) * stride);
  return offsets;
}

namespace {

struct PressRun {
  int first;
  int last;  // inclusive
};

std::vector<PressRun> press_runs(const MouseRecording& rec) {
  std::vector<PressRun> runs;
  for (int t = 0; t < rec.n_frames(); ++t) {
    if (!rec.samples[t].pressed) continue;
    if (!runs.empty() && runs.back().last == t - 1)
      runs.back().last = t;
    else
      runs.push_back({t, t});
  }
  return runs;
}

}  // namespace

TrackSet expand_drag_to_grid(const MouseRecording& rec, const GridSpec& spec, const VideoDims& dims) {
  if (rec.n_frames() != dims.frames) {
    throw ShapeError("recording has " + std::to_string(rec.n_frames()) + " samples for " +
                         std::to_string(dims.frames) + " frames",
                     "samples");
  }
  const auto offsets = grid_offsets(spec.grid_side, spec.stride);
  const auto runs = press_runs(rec);
  const auto per_grid = static_cast<Index>(offsets.size());

  TrackSet tracks(per_grid * static_cast<Index>(runs.size()), dims.frames, dims.width, dims.height);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const PressRun run = runs[r];
    for (Index k = 0; k < per_grid; ++k) {
      const Index n = static_cast<Index>(r) * per_grid + k;
      for (int t = 0; t < dims.frames; ++t) {
        const bool inside = t >= run.first && t <= run.last;
        const int cursor_frame = t < run.first ? run.first : (t > run.last ? run.last : t);
        const Eigen::Vector2d p = rec.samples[cursor_frame].position() + offsets[k];
        const bool vis = (inside || spec.persist) && tracks.in_frame(p);
        tracks.set(n, t, p, vis);
      }
    }
  }
  if (spec.static_pins) return add_static_pins(tracks, spec.static_pins->region, spec.static_pins->stride);
  return tracks;
}

TrackSet add_static_pins(const TrackSet& tracks, const Rect& region, int stride) {
  if (region.empty()) throw RangeError("pin region is empty", "region");
  if (stride < 1) throw RangeError("pin stride must be >= 1", "stride");
  if (region.x0 < 0 || region.y0 < 0 || region.x1 > tracks.width || region.y1 > tracks.height)
    throw RangeError("pin region extends outside the frame", "region");

  std::vector<Eigen::Vector2d> pins;
  for (double y = region.y0; y < region.y1; y += stride)
    for (double x = region.x0; x < region.x1; x += stride) pins.emplace_back(x, y);

  TrackSet added(static_cast<Index>(pins.size()), tracks.n_frames(), tracks.width, tracks.height);
  for (Index n = 0; n < added.n_tracks(); ++n) {
    added.x.row(n).setConstant(pins[n].x());
    added.y.row(n).setConstant(pins[n].y());
    added.visible.row(n).setConstant(1);
  }
  return concat_tracks(tracks, added);
}

}  // namespace mprompt
