#include "mprompt/track_core.hpp"

#include <algorithm>
#include <numeric>

#include "mprompt/errors.hpp"
#include "mprompt/random.hpp"

namespace mprompt {

TrackSet::TrackSet(Index n_tracks, Index n_frames, int width, int height)
    : width(width), height(height),
      x(CoordArray::Zero(n_tracks, n_frames)),
      y(CoordArray::Zero(n_tracks, n_frames)),
      visible(MaskArray::Zero(n_tracks, n_frames)) {}

bool TrackSet::in_frame(const Eigen::Vector2d& p) const {
  const int qx = quantize(p.x());
  const int qy = quantize(p.y());
  return qx >= 0 && qx < width && qy >= 0 && qy < height;
}

void TrackSet::validate() const {
  if (y.rows() != x.rows() || y.cols() != x.cols() || visible.rows() != x.rows() ||
      visible.cols() != x.cols()) {
    throw ShapeError("track arrays disagree in shape", "positions");
  }
  if (width < 0 || height < 0) throw InvariantError("negative frame size", "width");
  if (!x.allFinite() || !y.allFinite()) throw InvariantError("non-finite track position", "positions");
  if ((visible > std::uint8_t{1}).any()) throw InvariantError("visibility must be 0 or 1", "visibility");
}

bool TrackSet::operator==(const TrackSet& other) const {
  return width == other.width && height == other.height && x.rows() == other.x.rows() &&
         x.cols() == other.x.cols() && (x == other.x).all() && (y == other.y).all() &&
         (visible == other.visible).all();
}

TrackSet select_tracks(const TrackSet& tracks, const std::vector<Index>& rows) {
  TrackSet out(static_cast<Index>(rows.size()), tracks.n_frames(), tracks.width, tracks.height);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index r = rows[i];
    if (r < 0 || r >= tracks.n_tracks()) throw RangeError("track index out of range", "rows");
    out.x.row(i) = tracks.x.row(r);
    out.y.row(i) = tracks.y.row(r);
    out.visible.row(i) = tracks.visible.row(r);
  }
  return out;
}

TrackSet concat_tracks(const TrackSet& a, const TrackSet& b) {
  if (a.n_tracks() == 0) return b;
  if (b.n_tracks() == 0) return a;
  if (a.n_frames() != b.n_frames()) throw ShapeError("frame counts differ", "n_frames");
  if (a.width != b.width || a.height != b.height) throw ShapeError("frame sizes differ", "width");
  TrackSet out(a.n_tracks() + b.n_tracks(), a.n_frames(), a.width, a.height);
  out.x << a.x, b.x;
  out.y << a.y, b.y;
  out.visible << a.visible, b.visible;
  return out;
}

void mark_offscreen_invisible(TrackSet& tracks) {
  for (Index n = 0; n < tracks.n_tracks(); ++n)
    for (Index t = 0; t < tracks.n_frames(); ++t)
      if (!tracks.in_frame(tracks.position(n, t))) tracks.visible(n, t) = 0;
}

Eigen::VectorXf sinusoidal_embedding(int id, int channels) {
  Eigen::VectorXf phi(channels);
  for (int i = 0; i < channels / 2; ++i) {
    const double freq = std::pow(10000.0, 2.0 * i / channels);
    const double arg = id / freq;
    phi(2 * i) = static_cast<float>(std::sin(arg));
    phi(2 * i + 1) = static_cast<float>(std::cos(arg));
  }
  return phi;
}

EmbeddingTable assign_embeddings(int n_tracks, int channels, int max_index, std::uint64_t seed) {
  if (n_tracks < 0 || max_index < 0) throw RangeError("negative count", "n_tracks");
  if (n_tracks > max_index)
    throw CapacityError("requested " + std::to_string(n_tracks) + " tracks but only " +
                            std::to_string(max_index) + " embedding ids exist",
                        "n_tracks");
  if (channels <= 0 || channels % 2 != 0) throw RangeError("channel count must be positive and even", "channels");

  std::vector<int> pool(static_cast<std::size_t>(max_index));
  std::iota(pool.begin(), pool.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < n_tracks; ++i) {
    const auto j = i + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(max_index - i)));
    std::swap(pool[i], pool[j]);
  }

  EmbeddingTable table;
  table.channels = channels;
  table.max_index = max_index;
  table.ids.assign(pool.begin(), pool.begin() + n_tracks);
  table.vectors.resize(n_tracks, channels);
  for (int n = 0; n < n_tracks; ++n) table.vectors.row(n) = sinusoidal_embedding(table.ids[n], channels).transpose();
  return table;
}

std::size_t ConditioningVolume::nonzero_cells() const {
  std::size_t count = 0;
  for (std::size_t cell = 0; cell + channels <= values.size(); cell += channels) {
    for (int c = 0; c < channels; ++c) {
      if (values[cell + c] != 0.0f) {
        ++count;
        break;
      }
    }
  }
  return count;
}

ConditioningVolume encode_conditioning(const TrackSet& tracks, const EmbeddingTable& table,
                                       int frames, int height, int width) {
  if (tracks.n_frames() != frames)
    throw ShapeError("track set has " + std::to_string(tracks.n_frames()) + " frames, volume expects " +
                         std::to_string(frames),
                     "n_frames");
  if (table.size() < tracks.n_tracks()) throw ShapeError("embedding table does not cover every track", "table");
  if (height <= 0 || width <= 0) throw ShapeError("volume extents must be positive", "dims");

  ConditioningVolume volume(frames, height, width, table.channels);
  for (Index n = 0; n < tracks.n_tracks(); ++n) {
    const auto phi = table.vectors.row(n);
    for (Index t = 0; t < frames; ++t) {
      if (!tracks.visible(n, t)) continue;
      const int qx = quantize(tracks.x(n, t));
      const int qy = quantize(tracks.y(n, t));
      if (qx < 0 || qx >= width || qy < 0 || qy >= height) continue;
      float* cell = volume.values.data() + volume.offset(static_cast<int>(t), qy, qx);
      for (int c = 0; c < table.channels; ++c) cell[c] += phi(c);
    }
  }
  return volume;
}

std::vector<Index> subsample_indices(Index n, Index k, std::uint64_t seed) {
  if (k < 1 || k > n) throw RangeError("subsample size must lie in [1, n_tracks]", "k");
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  Rng rng(seed);
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(uniform_below(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

TrackSet subsample_tracks(const TrackSet& tracks, Index k, std::uint64_t seed) {
  return select_tracks(tracks, subsample_indices(tracks.n_tracks(), k, seed));
}

Displacements to_displacements(const TrackSet& tracks) {
  if (tracks.n_frames() < 1) throw ShapeError("displacements need at least one frame", "n_frames");
  return {tracks.x.colwise() - tracks.x.col(0), tracks.y.colwise() - tracks.y.col(0)};
}

}  // namespace mprompt
