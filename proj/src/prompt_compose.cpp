#include "mprompt/prompt_compose.hpp"

#include <cmath>
#include <limits>

#include "mprompt/errors.hpp"

namespace mprompt {

TrackSet compose(const TrackSet& camera, std::span<const ObjectLayer> layers) {
  for (const ObjectLayer& layer : layers) {
    if (layer.tracks.n_frames() != camera.n_frames()) {
      throw ShapeError("object tracks have " + std::to_string(layer.tracks.n_frames()) + " frames, camera tracks " +
                           std::to_string(camera.n_frames()),
                       "n_frames");
    }
  }
  TrackSet out = camera;
  if (camera.n_frames() == 0) return out;
  std::vector<Displacements> deltas;
  deltas.reserve(layers.size());
  for (const ObjectLayer& layer : layers) deltas.push_back(to_displacements(layer.tracks));

  for (Index n = 0; n < camera.n_tracks(); ++n) {
    const Eigen::Vector2d start = camera.position(n, 0);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const TrackSet& obj = layers[l].tracks;
      if (!layers[l].region.contains(start) || obj.n_tracks() == 0) continue;
      Index nearest = 0;
      double best = std::numeric_limits<double>::infinity();
      for (Index m = 0; m < obj.n_tracks(); ++m) {
        const double d2 = (obj.position(m, 0) - start).squaredNorm();
        if (d2 < best) {
          best = d2;
          nearest = m;
        }
      }
      out.x.row(n) += deltas[l].dx.row(nearest);
      out.y.row(n) += deltas[l].dy.row(nearest);
      out.visible.row(n) *= obj.visible.row(nearest);
      break;
    }
  }
  return out;
}

TrackSet compose(const TrackSet& camera, const TrackSet& object_tracks, const Rect& region) {
  const ObjectLayer layer{object_tracks, region};
  return compose(camera, std::span<const ObjectLayer>(&layer, 1));
}

TrackSet transfer_retarget(const TrackSet& source, int target_width, int target_height, Index k, std::uint64_t seed) {
  if (target_width <= 0 || target_height <= 0) throw RangeError("target dimensions must be positive", "target_dims");
  if (source.width <= 0 || source.height <= 0) throw RangeError("source dimensions must be positive", "width");
  TrackSet scaled = source;
  scaled.width = target_width;
  scaled.height = target_height;
  scaled.x *= static_cast<double>(target_width) / source.width;
  scaled.y *= static_cast<double>(target_height) / source.height;
  if (k == source.n_tracks()) return scaled;
  return subsample_tracks(scaled, k, seed);
}

namespace {

// Unnormalised Gaussian taps for offsets 0..ceil(3 sigma).
std::vector<double> half_kernel(double sigma) {
  const int reach = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(reach) + 1);
  for (int i = 0; i <= reach; ++i) taps[i] = std::exp(-0.5 * i * i / (sigma * sigma));
  return taps;
}

void smooth_in_time(Displacements& d, const MaskArray& visible, double sigma) {
  const auto taps = half_kernel(sigma);
  const int reach = static_cast<int>(taps.size()) - 1;
  const Index frames = d.dx.cols();
  Displacements out = d;
  for (Index n = 0; n < d.dx.rows(); ++n) {
    for (Index t = 0; t < frames; ++t) {
      double sx = 0, sy = 0, sw = 0;
      for (Index s = std::max<Index>(0, t - reach); s <= std::min(frames - 1, t + reach); ++s) {
        if (!visible(n, s)) continue;
        const double w = taps[static_cast<std::size_t>(std::abs(s - t))];
        sx += w * d.dx(n, s);
        sy += w * d.dy(n, s);
        sw += w;
      }
      if (sw > 0) {
        out.dx(n, t) = sx / sw;
        out.dy(n, t) = sy / sw;
      }
    }
  }
  d = std::move(out);
}

void smooth_in_space(Displacements& d, const TrackSet& tracks, double sigma) {
  const Index n_tracks = tracks.n_tracks();
  const double reach2 = 9.0 * sigma * sigma;
  struct Neighbor {
    Index index;
    double weight;
  };
  std::vector<std::vector<Neighbor>> neighbors(static_cast<std::size_t>(n_tracks));
  for (Index n = 0; n < n_tracks; ++n) {
    for (Index m = 0; m < n_tracks; ++m) {
      const double d2 = (tracks.position(m, 0) - tracks.position(n, 0)).squaredNorm();
      if (d2 <= reach2) neighbors[n].push_back({m, std::exp(-0.5 * d2 / (sigma * sigma))});
    }
  }
  Displacements out = d;
  for (Index n = 0; n < n_tracks; ++n) {
    for (Index t = 0; t < tracks.n_frames(); ++t) {
      double sx = 0, sy = 0, sw = 0;
      for (const Neighbor& nb : neighbors[n]) {
        if (!tracks.visible(nb.index, t)) continue;
        sx += nb.weight * d.dx(nb.index, t);
        sy += nb.weight * d.dy(nb.index, t);
        sw += nb.weight;
      }
      if (sw > 0) {
        out.dx(n, t) = sx / sw;
        out.dy(n, t) = sy / sw;
      }
    }
  }
  d = std::move(out);
}

}  // namespace

TrackSet magnify(const TrackSet& tracks, const MagnifyParams& params) {
  if (!(params.alpha >= 0)) throw RangeError("alpha must be >= 0", "alpha");
  if (!(params.sigma_space >= 0)) throw RangeError("sigma_space must be >= 0", "sigma_space");
  if (!(params.sigma_time >= 0)) throw RangeError("sigma_time must be >= 0", "sigma_time");
  const bool smoothing = params.sigma_time > 0 || params.sigma_space > 0;
  if (tracks.n_frames() == 0 || (params.alpha == 1.0 && !smoothing)) return tracks;

  Displacements d = to_displacements(tracks);
  if (params.sigma_time > 0) smooth_in_time(d, tracks.visible, params.sigma_time);
  if (params.sigma_space > 0) smooth_in_space(d, tracks, params.sigma_space);
  if (smoothing) {
    // Smoothing can move frame 0; re-anchor so every track still starts at
    // its original position.
    d.dx.colwise() -= Eigen::ArrayXd(d.dx.col(0));
    d.dy.colwise() -= Eigen::ArrayXd(d.dy.col(0));
  }

  TrackSet out = tracks;
  out.x = (params.alpha * d.dx).colwise() + tracks.x.col(0);
  out.y = (params.alpha * d.dy).colwise() + tracks.y.col(0);
  return out;
}

double effective_gain(const TrackSet& original, const TrackSet& magnified) {
  if (original.n_tracks() != magnified.n_tracks() || original.n_frames() != magnified.n_frames())
    throw ShapeError("track sets differ in shape", "tracks");
  const Displacements a = to_displacements(original);
  const Displacements b = to_displacements(magnified);
  double num = 0, den = 0;
  for (Index n = 0; n < original.n_tracks(); ++n) {
    for (Index t = 0; t < original.n_frames(); ++t) {
      if (!original.visible(n, t)) continue;
      num += a.dx(n, t) * b.dx(n, t) + a.dy(n, t) * b.dy(n, t);
      den += a.dx(n, t) * a.dx(n, t) + a.dy(n, t) * a.dy(n, t);
    }
  }
  if (den == 0) throw UndefinedMetricError("no visible displacement to measure gain against", "tracks");
  return num / den;
}

}  // namespace mprompt
