#include "mprompt/tracker.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "mprompt/errors.hpp"

namespace mprompt {

namespace {

// Summed-area tables of luma and luma^2 for O(1) window statistics.
struct FrameStats {
  LumaImage luma;
  Eigen::ArrayXXd sum;
  Eigen::ArrayXXd sum_sq;

  explicit FrameStats(const RgbImage& frame) : luma(to_luma(frame)) {
    const Index h = luma.rows(), w = luma.cols();
    sum = Eigen::ArrayXXd::Zero(h + 1, w + 1);
    sum_sq = Eigen::ArrayXXd::Zero(h + 1, w + 1);
    for (Index y = 0; y < h; ++y) {
      for (Index x = 0; x < w; ++x) {
        const double v = luma(y, x);
        sum(y + 1, x + 1) = v + sum(y, x + 1) + sum(y + 1, x) - sum(y, x);
        sum_sq(y + 1, x + 1) = v * v + sum_sq(y, x + 1) + sum_sq(y + 1, x) - sum_sq(y, x);
      }
    }
  }

  static double box(const Eigen::ArrayXXd& s, int x0, int y0, int x1, int y1) {
    return s(y1 + 1, x1 + 1) - s(y0, x1 + 1) - s(y1 + 1, x0) + s(y0, x0);
  }
};

double ncc_at(const FrameStats& f, const LumaImage& tmpl, double tmpl_norm, int cx, int cy, int half) {
  if (tmpl_norm <= 0) return 0.0;
  const int side = 2 * half + 1;
  const double n = side * side;
  const double s = FrameStats::box(f.sum, cx - half, cy - half, cx + half, cy + half);
  const double s2 = FrameStats::box(f.sum_sq, cx - half, cy - half, cx + half, cy + half);
  const double var = s2 - s * s / n;
  if (var <= 1e-9) return 0.0;
  // Template is zero-mean, so the image mean drops out of the cross term.
  const double cross = (tmpl * f.luma.block(cy - half, cx - half, side, side)).sum();
  return cross / (tmpl_norm * std::sqrt(var));
}

LumaImage sample_patch(const LumaImage& luma, const Eigen::Vector2d& center, int half) {
  LumaImage patch(2 * half + 1, 2 * half + 1);
  for (int dy = -half; dy <= half; ++dy)
    for (int dx = -half; dx <= half; ++dx) patch(dy + half, dx + half) = sample_bilinear(luma, center.x() + dx, center.y() + dy);
  return patch;
}

double ncc_patch(const LumaImage& tmpl, double tmpl_norm, const LumaImage& patch) {
  if (tmpl_norm <= 0) return 0.0;
  const LumaImage centered = patch - patch.mean();
  const double norm = std::sqrt(centered.square().sum());
  if (norm <= 1e-9) return 0.0;
  return (tmpl * centered).sum() / (tmpl_norm * norm);
}

// Gauss-Newton (Lucas-Kanade) refinement of a translation: minimises the
// squared difference between the mean-removed patch at `start` + u and the
// zero-mean template. Stays within one pixel of `start`.
Eigen::Vector2d refine_translation(const LumaImage& luma, const LumaImage& tmpl, const Eigen::Vector2d& start, int half) {
  Eigen::Vector2d pos = start;
  for (int iter = 0; iter < 10; ++iter) {
    Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    const LumaImage patch = sample_patch(luma, pos, half);
    const double mean = patch.mean();
    for (int dy = -half; dy <= half; ++dy) {
      for (int dx = -half; dx <= half; ++dx) {
        const double x = pos.x() + dx, y = pos.y() + dy;
        const Eigen::Vector2d grad(0.5 * (sample_bilinear(luma, x + 1, y) - sample_bilinear(luma, x - 1, y)),
                                   0.5 * (sample_bilinear(luma, x, y + 1) - sample_bilinear(luma, x, y - 1)));
        const double residual = tmpl(dy + half, dx + half) - (patch(dy + half, dx + half) - mean);
        hessian += grad * grad.transpose();
        rhs += grad * residual;
      }
    }
    if (std::abs(hessian.determinant()) < 1e-9) break;
    const Eigen::Vector2d step = hessian.inverse() * rhs;
    pos += step;
    if ((pos - start).lpNorm<Eigen::Infinity>() > 1.0) return start;
    if (step.norm() < 1e-3) break;
  }
  return pos;
}

}  // namespace

NccTrackResult track_ncc(const Video& video, const std::vector<Eigen::Vector2d>& queries, const NccTrackerParams& params) {
  if (params.patch < 1 || params.patch % 2 == 0) throw RangeError("patch size must be odd and positive", "patch");
  if (params.search < 0) throw RangeError("search radius must be >= 0", "search");
  if (video.frames.empty()) throw ShapeError("video has no frames", "frames");
  const int w = video.width(), h = video.height();
  const int half = params.patch / 2;
  if (w < params.patch || h < params.patch) throw RangeError("frame smaller than the tracking patch", "patch");

  NccTrackResult result;
  result.tracks = TrackSet(static_cast<Index>(queries.size()), video.n_frames(), w, h);
  std::vector<FrameStats> stats;
  stats.reserve(video.frames.size());
  for (const RgbImage& f : video.frames) {
    if (f.width != w || f.height != h) throw ShapeError("video frames differ in size", "frames");
    stats.emplace_back(f);
  }

  const double lo_x = half, hi_x = w - 1 - half, lo_y = half, hi_y = h - 1 - half;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    Eigen::Vector2d pos(std::clamp(queries[q].x(), lo_x, hi_x), std::clamp(queries[q].y(), lo_y, hi_y));
    if (pos != queries[q]) ++result.clamped_queries;
    const auto n = static_cast<Index>(q);

    LumaImage tmpl = sample_patch(stats[0].luma, pos, half);
    tmpl -= tmpl.mean();
    const double tmpl_norm = std::sqrt(tmpl.square().sum());

    result.tracks.set(n, 0, pos, true);
    for (int t = 1; t < video.n_frames(); ++t) {
      const int cx = quantize(pos.x()), cy = quantize(pos.y());
      const int x0 = std::max(half, cx - params.search), x1 = std::min(w - 1 - half, cx + params.search);
      const int y0 = std::max(half, cy - params.search), y1 = std::min(h - 1 - half, cy + params.search);
      // The previous sub-pixel position competes with the integer lattice so
      // that a static scene keeps the track exactly where it was.
      Eigen::Vector2d start = pos;
      double best = ncc_patch(tmpl, tmpl_norm, sample_patch(stats[t].luma, pos, half));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double s = ncc_at(stats[t], tmpl, tmpl_norm, x, y, half);
          if (s > best) {
            best = s;
            start = Eigen::Vector2d(x, y);
          }
        }
      }
      if (best < params.threshold) {
        result.tracks.set(n, t, pos, false);
        continue;
      }
      const Eigen::Vector2d refined = refine_translation(stats[t].luma, tmpl, start, half);
      pos = ncc_patch(tmpl, tmpl_norm, sample_patch(stats[t].luma, refined, half)) >= best ? refined : start;
      result.tracks.set(n, t, pos, true);
    }
  }
  return result;
}

std::vector<Eigen::Vector2d> start_points(const TrackSet& tracks) {
  std::vector<Eigen::Vector2d> points;
  points.reserve(static_cast<std::size_t>(tracks.n_tracks()));
  for (Index n = 0; n < tracks.n_tracks(); ++n) points.push_back(tracks.position(n, 0));
  return points;
}

}  // namespace mprompt
