#include "mprompt/synth_warp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "mprompt/errors.hpp"

namespace mprompt {

TrackInterpolator::TrackInterpolator(const TrackSet& tracks, Index frame, int neighbors) : neighbors_(neighbors) {
  if (neighbors < 1) throw RangeError("interpolation needs at least one neighbour", "neighbors");
  for (Index n = 0; n < tracks.n_tracks(); ++n) {
    if (!tracks.visible(n, frame)) continue;
    anchors_.push_back(tracks.position(n, 0));
    deltas_.push_back(tracks.position(n, frame) - tracks.position(n, 0));
  }
  if (anchors_.empty()) return;

  Eigen::Vector2d lo = anchors_.front(), hi = anchors_.front();
  for (const auto& a : anchors_) {
    lo = lo.cwiseMin(a);
    hi = hi.cwiseMax(a);
  }
  const Eigen::Vector2d extent = (hi - lo).cwiseMax(1.0);
  cell_ = std::max(1.0, 2.0 * std::sqrt(extent.prod() / static_cast<double>(anchors_.size())));
  origin_ = lo;
  grid_w_ = static_cast<int>(extent.x() / cell_) + 1;
  grid_h_ = static_cast<int>(extent.y() / cell_) + 1;
  buckets_.assign(static_cast<std::size_t>(grid_w_) * grid_h_, {});
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    const int gx = std::min(grid_w_ - 1, static_cast<int>((anchors_[i].x() - lo.x()) / cell_));
    const int gy = std::min(grid_h_ - 1, static_cast<int>((anchors_[i].y() - lo.y()) / cell_));
    buckets_[static_cast<std::size_t>(gy) * grid_w_ + gx].push_back(static_cast<int>(i));
  }
}

void TrackInterpolator::gather(const Eigen::Vector2d& at, std::vector<std::pair<double, int>>& best) const {
  const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(neighbors_), anchors_.size());
  const int qx = static_cast<int>(std::floor((at.x() - origin_.x()) / cell_));
  const int qy = static_cast<int>(std::floor((at.y() - origin_.y()) / cell_));
  // Rings beyond this Chebyshev radius cannot touch the grid.
  const int max_ring = std::max({std::abs(qx), std::abs(qx - grid_w_ + 1), std::abs(qy), std::abs(qy - grid_h_ + 1)});
  auto visit = [&](int gx, int gy) {
    if (gx < 0 || gx >= grid_w_ || gy < 0 || gy >= grid_h_) return;
    for (int i : buckets_[static_cast<std::size_t>(gy) * grid_w_ + gx]) {
      const std::pair<double, int> cand{(anchors_[i] - at).squaredNorm(), i};
      if (best.size() < want) {
        best.push_back(cand);
        std::push_heap(best.begin(), best.end());
      } else if (cand < best.front()) {
        std::pop_heap(best.begin(), best.end());
        best.back() = cand;
        std::push_heap(best.begin(), best.end());
      }
    }
  };
  for (int r = 0; r <= max_ring; ++r) {
    if (r == 0) {
      visit(qx, qy);
    } else {
      for (int gx = qx - r; gx <= qx + r; ++gx) {
        visit(gx, qy - r);
        visit(gx, qy + r);
      }
      for (int gy = qy - r + 1; gy <= qy + r - 1; ++gy) {
        visit(qx - r, gy);
        visit(qx + r, gy);
      }
    }
    // Anything in ring r+1 is at least r cells away from the query.
    const double reach = r * cell_;
    if (best.size() == want && best.front().first <= reach * reach) break;
  }
}

Eigen::Vector2d TrackInterpolator::operator()(const Eigen::Vector2d& at) const {
  if (anchors_.empty()) return Eigen::Vector2d::Zero();
  std::vector<std::pair<double, int>> best;
  best.reserve(static_cast<std::size_t>(neighbors_));
  gather(at, best);
  std::sort(best.begin(), best.end());
  if (best.size() == 1 || best.front().first < 1e-18) return deltas_[best.front().second];
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  double wsum = 0.0;
  for (const auto& [d2, i] : best) {
    const double w = 1.0 / d2;
    sum += w * deltas_[i];
    wsum += w;
  }
  return sum / wsum;
}

std::vector<DisplacementField> interpolate_field(const TrackSet& tracks, int width, int height) {
  if (width <= 0 || height <= 0) throw RangeError("field dimensions must be positive", "dims");
  std::vector<DisplacementField> fields;
  fields.reserve(static_cast<std::size_t>(tracks.n_frames()));
  for (Index t = 0; t < tracks.n_frames(); ++t) {
    DisplacementField f{Eigen::ArrayXXd::Zero(height, width), Eigen::ArrayXXd::Zero(height, width)};
    const TrackInterpolator interp(tracks, t);
    if (!interp.empty()) {
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          const Eigen::Vector2d d = interp(Eigen::Vector2d(x, y));
          f.dx(y, x) = d.x();
          f.dy(y, x) = d.y();
        }
      }
    }
    fields.push_back(std::move(f));
  }
  return fields;
}

namespace {

RgbImage splat_frame(const RgbImage& src, const DisplacementField& field) {
  const int w = src.width, h = src.height;
  std::vector<double> accum(static_cast<std::size_t>(w) * h * 3, 0.0);
  std::vector<double> weight(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double tx = x + field.dx(y, x);
      const double ty = y + field.dy(y, x);
      const double fx0 = std::floor(tx), fy0 = std::floor(ty);
      if (fx0 < -1 || fy0 < -1 || fx0 > w || fy0 > h) continue;
      const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
      const double ax = tx - fx0, ay = ty - fy0;
      const int xs[2] = {x0, x0 + 1};
      const int ys[2] = {y0, y0 + 1};
      const double wx[2] = {1.0 - ax, ax};
      const double wy[2] = {1.0 - ay, ay};
      for (int j = 0; j < 2; ++j) {
        if (ys[j] < 0 || ys[j] >= h) continue;
        for (int i = 0; i < 2; ++i) {
          if (xs[i] < 0 || xs[i] >= w) continue;
          const double wt = wx[i] * wy[j];
          if (wt <= 0.0) continue;
          const std::size_t p = static_cast<std::size_t>(ys[j]) * w + xs[i];
          weight[p] += wt;
          for (int c = 0; c < 3; ++c) accum[p * 3 + c] += wt * src.at(x, y, c);
        }
      }
    }
  }

  RgbImage out(w, h);
  constexpr double kCovered = 1e-6;
  std::vector<std::uint8_t> filled(static_cast<std::size_t>(w) * h, 0);
  std::deque<std::size_t> frontier;
  for (std::size_t p = 0; p < weight.size(); ++p) {
    if (weight[p] <= kCovered) continue;
    for (int c = 0; c < 3; ++c)
      out.data[p * 3 + c] = static_cast<std::uint8_t>(std::clamp(std::floor(accum[p * 3 + c] / weight[p] + 0.5), 0.0, 255.0));
    filled[p] = 1;
    frontier.push_back(p);
  }
  if (frontier.empty()) return src;
  // Breadth-first flood from covered pixels fills holes with the nearest colour.
  while (!frontier.empty()) {
    const std::size_t p = frontier.front();
    frontier.pop_front();
    const int px = static_cast<int>(p % w), py = static_cast<int>(p / w);
    const int nx[4] = {px - 1, px + 1, px, px};
    const int ny[4] = {py, py, py - 1, py + 1};
    for (int k = 0; k < 4; ++k) {
      if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
      const std::size_t q = static_cast<std::size_t>(ny[k]) * w + nx[k];
      if (filled[q]) continue;
      filled[q] = 1;
      for (int c = 0; c < 3; ++c) out.data[q * 3 + c] = out.data[p * 3 + c];
      frontier.push_back(q);
    }
  }
  return out;
}

}  // namespace

Video render_warp(const RgbImage& first_frame, const TrackSet& tracks, const VideoDims& dims, double fps) {
  if (first_frame.width != dims.width || first_frame.height != dims.height)
    throw ShapeError("first frame is " + std::to_string(first_frame.width) + "x" + std::to_string(first_frame.height) +
                         ", expected " + std::to_string(dims.width) + "x" + std::to_string(dims.height),
                     "first_frame");
  if (tracks.n_frames() != dims.frames)
    throw ShapeError("tracks have " + std::to_string(tracks.n_frames()) + " frames, expected " +
                         std::to_string(dims.frames),
                     "n_frames");
  Video video;
  video.fps = fps;
  video.frames.reserve(static_cast<std::size_t>(dims.frames));
  const auto fields = interpolate_field(tracks, dims.width, dims.height);
  for (int t = 0; t < dims.frames; ++t) video.frames.push_back(t == 0 ? first_frame : splat_frame(first_frame, fields[t]));
  return video;
}

namespace {

Eigen::Vector3d hue_color(double h) {
  const double r = std::clamp(std::abs(h * 6.0 - 3.0) - 1.0, 0.0, 1.0);
  const double g = std::clamp(2.0 - std::abs(h * 6.0 - 2.0), 0.0, 1.0);
  const double b = std::clamp(2.0 - std::abs(h * 6.0 - 4.0), 0.0, 1.0);
  return 255.0 * Eigen::Vector3d(r, g, b);
}

void plot(RgbImage& img, const Eigen::Vector2d& p, const Eigen::Vector3d& color) {
  const int x = quantize(p.x()), y = quantize(p.y());
  if (x < 0 || x >= img.width || y < 0 || y >= img.height) return;
  for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>(color(c));
}

}  // namespace

RgbImage render_overlay(const RgbImage& first_frame, const TrackSet& tracks) {
  RgbImage out = first_frame;
  for (auto& v : out.data) v = static_cast<std::uint8_t>(v / 2);  // dim the background
  const double golden = 0.6180339887498949;
  for (Index n = 0; n < tracks.n_tracks(); ++n) {
    const Eigen::Vector3d color = hue_color(std::fmod(n * golden, 1.0));
    Index last = -1;
    for (Index t = 0; t < tracks.n_frames(); ++t) {
      if (!tracks.visible(n, t)) {
        last = -1;
        continue;
      }
      if (last >= 0) {
        const Eigen::Vector2d a = tracks.position(n, last), b = tracks.position(n, t);
        const int steps = std::max(1, static_cast<int>(std::ceil((b - a).lpNorm<Eigen::Infinity>())));
        for (int s = 0; s <= steps; ++s) plot(out, a + (b - a) * (static_cast<double>(s) / steps), color);
      }
      last = t;
    }
    for (Index t = tracks.n_frames() - 1; t >= 0; --t) {
      if (!tracks.visible(n, t)) continue;
      const Eigen::Vector2d p = tracks.position(n, t);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) plot(out, p + Eigen::Vector2d(dx, dy), Eigen::Vector3d(255, 255, 255));
      break;
    }
  }
  return out;
}

}  // namespace mprompt
