#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

namespace mprompt {

using Eigen::Index;

// Row-major N x T arrays: row n is one trajectory, column t one frame.
using CoordArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskArray = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct VideoDims {
  int frames = 80;
  int width = 128;
  int height = 128;
};

/// N point trajectories over T frames, in pixel coordinates of a
/// width x height frame, with a binary visibility flag per sample.
///
/// A sample may sit outside the frame. Visible samples that quantize outside
/// the frame are dropped by the conditioning encoder; samples with
/// visibility 0 keep their positions (occluded or off-screen-but-tracked).
struct TrackSet {
  int width = 0;
  int height = 0;
  CoordArray x;
  CoordArray y;
  MaskArray visible;

  TrackSet() = default;
  TrackSet(Index n_tracks, Index n_frames, int width, int height);

  Index n_tracks() const { return x.rows(); }
  Index n_frames() const { return x.cols(); }

  Eigen::Vector2d position(Index n, Index t) const { return {x(n, t), y(n, t)}; }
  void set(Index n, Index t, const Eigen::Vector2d& p, bool vis) {
    x(n, t) = p.x();
    y(n, t) = p.y();
    visible(n, t) = vis ? 1 : 0;
  }
  bool in_frame(const Eigen::Vector2d& p) const;

  // Throws InvariantError / ShapeError when the arrays disagree in shape,
  // a flag is not 0/1 or a coordinate is not finite.
  void validate() const;

  bool operator==(const TrackSet& other) const;
};

// Selects rows (tracks) in the given order.
TrackSet select_tracks(const TrackSet& tracks, const std::vector<Index>& rows);

// Concatenates tracks of `b` after those of `a`; frame counts and dims must match.
TrackSet concat_tracks(const TrackSet& a, const TrackSet& b);

// Clears visibility of samples whose rounded position lies outside the frame.
void mark_offscreen_invisible(TrackSet& tracks);

// Nearest-integer quantization used everywhere a track meets the pixel grid;
// ties round up.
inline int quantize(double v) { return static_cast<int>(std::floor(v + 0.5)); }

// ---------------------------------------------------------------------------
// Embeddings and the conditioning volume

/// Random, location-independent assignment of sinusoidal embeddings to tracks.
struct EmbeddingTable {
  int channels = 0;
  int max_index = 0;
  std::vector<int> ids;  // ids[n] in [0, max_index), pairwise distinct
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> vectors;  // n x C

  Index size() const { return static_cast<Index>(ids.size()); }
};

// Sinusoidal positional encoding of integer `id`: component 2i is
// sin(id / 10000^(2i/C)), component 2i+1 the matching cos.
Eigen::VectorXf sinusoidal_embedding(int id, int channels);

// Draws n_tracks distinct ids uniformly from [0, max_index) (partial
// Fisher-Yates on a seeded Rng) and looks up their embeddings.
EmbeddingTable assign_embeddings(int n_tracks, int channels, int max_index, std::uint64_t seed);

/// T x H x W x C float volume, zero except where visible tracks land.
struct ConditioningVolume {
  int frames = 0;
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> values;

  ConditioningVolume() = default;
  ConditioningVolume(int frames, int height, int width, int channels)
      : frames(frames), height(height), width(width), channels(channels),
        values(static_cast<std::size_t>(frames) * height * width * channels, 0.0f) {}

  std::size_t offset(int t, int y, int x) const {
    return ((static_cast<std::size_t>(t) * height + y) * width + x) * channels;
  }
  float at(int t, int y, int x, int c) const { return values[offset(t, y, x) + c]; }
  std::size_t nonzero_cells() const;
};

// Places v[n,t] * phi_n at [t, round(y), round(x)] for every track sample,
// summing collisions in track-index order. Visible samples quantizing outside
// the W x H grid are dropped.
ConditioningVolume encode_conditioning(const TrackSet& tracks, const EmbeddingTable& table,
                                       int frames, int height, int width);

// Uniform sample of k tracks without replacement; kept tracks stay in their
// original relative order.
TrackSet subsample_tracks(const TrackSet& tracks, Index k, std::uint64_t seed);

// Indices picked by subsample_tracks, ascending.
std::vector<Index> subsample_indices(Index n, Index k, std::uint64_t seed);

struct Displacements {
  CoordArray dx;
  CoordArray dy;
};

// dx(n, t) = x(n, t) - x(n, 0), likewise for y.
Displacements to_displacements(const TrackSet& tracks);

}  // namespace mprompt
