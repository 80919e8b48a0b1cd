// Slow, direct reference implementations used to check the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mprompt/camera.hpp"
#include "mprompt/track_core.hpp"

namespace oracle {

using mprompt::Index;
using mprompt::TrackSet;

inline int nearest(double v) {
  // Half-up rounding written without floor(v + 0.5).
  const double f = std::floor(v);
  return static_cast<int>(v - f >= 0.5 ? f + 1 : f);
}

// Triple loop over (t, y, x); for each cell scans every track in index order.
inline std::vector<float> encode(const TrackSet& tracks, const std::vector<std::vector<float>>& phi, int frames,
                                 int height, int width, int channels) {
  std::vector<float> out(static_cast<std::size_t>(frames) * height * width * channels, 0.0f);
  for (int t = 0; t < frames; ++t)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        for (Index n = 0; n < tracks.n_tracks(); ++n) {
          if (tracks.visible(n, t) != 1) continue;
          if (nearest(tracks.x(n, t)) != x || nearest(tracks.y(n, t)) != y) continue;
          for (int c = 0; c < channels; ++c)
            out[((static_cast<std::size_t>(t) * height + y) * width + x) * channels + c] += phi[n][c];
        }
  return out;
}

inline std::vector<float> embedding(int id, int channels) {
  std::vector<float> v(static_cast<std::size_t>(channels));
  for (int c = 0; c < channels; ++c) {
    const int pair = c / 2;
    const double arg = static_cast<double>(id) / std::pow(10000.0, static_cast<double>(2 * pair) / channels);
    v[c] = static_cast<float>(c % 2 == 0 ? std::sin(arg) : std::cos(arg));
  }
  return v;
}

// O(P^2) neighbourhood z-test. Candidates are in front of the camera and
// quantize inside the frame; everything else is invisible.
inline std::vector<std::uint8_t> zbuffer(const std::vector<double>& u, const std::vector<double>& v,
                                         const std::vector<double>& z, int radius, double slack, int width, int height,
                                         double near = 1e-9) {
  const std::size_t n = u.size();
  std::vector<bool> cand(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int qx = nearest(u[i]), qy = nearest(v[i]);
    cand[i] = z[i] > near && qx >= 0 && qx < width && qy >= 0 && qy < height;
  }
  std::vector<std::uint8_t> vis(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!cand[i]) continue;
    bool occluded = false;
    for (std::size_t j = 0; j < n && !occluded; ++j) {
      if (j == i || !cand[j]) continue;
      if (std::abs(nearest(u[i]) - nearest(u[j])) > radius || std::abs(nearest(v[i]) - nearest(v[j])) > radius) continue;
      if (z[j] + slack < z[i]) occluded = true;
    }
    vis[i] = occluded ? 0 : 1;
  }
  return vis;
}

// Uniform draw in [0, bound) from the same engine stream as the library:
// accept a 64-bit draw only below the largest multiple of bound.
inline std::uint64_t below(std::mt19937_64& rng, std::uint64_t bound) {
  const unsigned __int128 span = static_cast<unsigned __int128>(1) << 64;
  const unsigned __int128 accept = span - span % bound;
  for (;;) {
    const std::uint64_t d = rng();
    if (static_cast<unsigned __int128>(d) < accept) return d % bound;
  }
}

// Seeded partial shuffle: first k slots of a forward Fisher-Yates pass.
inline std::vector<Index> shuffle_pick(Index n, Index k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Index> deck;
  for (Index i = 0; i < n; ++i) deck.push_back(i);
  for (Index i = 0; i < k; ++i) {
    const Index j = i + static_cast<Index>(below(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(deck[i], deck[j]);
  }
  deck.resize(static_cast<std::size_t>(k));
  std::sort(deck.begin(), deck.end());
  return deck;
}

inline double epe(const TrackSet& a, const TrackSet& b) {
  double sum = 0;
  int count = 0;
  for (Index n = 0; n < a.n_tracks(); ++n)
    for (Index t = 0; t < a.n_frames(); ++t)
      if (a.visible(n, t)) {
        const double dx = a.x(n, t) - b.x(n, t), dy = a.y(n, t) - b.y(n, t);
        sum += std::sqrt(dx * dx + dy * dy);
        ++count;
      }
  return sum / count;
}

// Random track set with positions that may fall just outside the frame.
inline TrackSet random_tracks(std::mt19937_64& rng, Index n, Index t, int w, int h, double vis_prob = 0.7) {
  std::uniform_real_distribution<double> ux(-1.0, w + 0.5), uy(-1.0, h + 0.5), coin(0.0, 1.0);
  TrackSet tracks(n, t, w, h);
  for (Index i = 0; i < n; ++i)
    for (Index f = 0; f < t; ++f) tracks.set(i, f, {ux(rng), uy(rng)}, coin(rng) < vis_prob);
  return tracks;
}

}  // namespace oracle
