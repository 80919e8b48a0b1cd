#include <gtest/gtest.h>

#include <set>

#include "mprompt/errors.hpp"
#include "mprompt/eval.hpp"
#include "mprompt/synth_warp.hpp"
#include "mprompt/synthetic.hpp"
#include "test_util.hpp"

using namespace mprompt;

namespace {

TrackSet translating_grid(int frames, int w, int h, int stride, const Eigen::Vector2d& total) {
  TrackSet tracks;
  std::vector<Eigen::Vector2d> starts;
  for (int y = stride / 2; y < h; y += stride)
    for (int x = stride / 2; x < w; x += stride) starts.emplace_back(x, y);
  tracks = TrackSet(static_cast<Index>(starts.size()), frames, w, h);
  for (std::size_t n = 0; n < starts.size(); ++n)
    for (int t = 0; t < frames; ++t)
      tracks.set(static_cast<Index>(n), t, starts[n] + total * t / (frames - 1), true);
  return tracks;
}

}  // namespace

TEST(InterpolateField, SingleTrackGivesUniformField) {
  TrackSet tracks(1, 3, 20, 16);
  tracks.set(0, 0, {5.0, 7.0}, true);
  tracks.set(0, 1, {6.5, 5.0}, true);
  tracks.set(0, 2, {2.0, 9.0}, true);
  const auto fields = interpolate_field(tracks, 20, 16);
  ASSERT_EQ(fields.size(), 3u);
  EXPECT_TRUE((fields[1].dx == 1.5).all());
  EXPECT_TRUE((fields[1].dy == -2.0).all());
  EXPECT_TRUE((fields[2].dx == -3.0).all());
  EXPECT_TRUE((fields[2].dy == 2.0).all());
}

TEST(InterpolateField, NoVisibleTracksGivesZeroField) {
  TrackSet tracks(2, 2, 8, 8);
  tracks.set(0, 0, {1, 1}, true);
  tracks.set(0, 1, {3, 1}, false);
  tracks.set(1, 0, {5, 5}, true);
  tracks.set(1, 1, {6, 2}, false);
  const auto fields = interpolate_field(tracks, 8, 8);
  EXPECT_TRUE((fields[1].dx == 0.0).all());
  EXPECT_TRUE((fields[1].dy == 0.0).all());
  EXPECT_EQ(TrackInterpolator(tracks, 1)({2.0, 2.0}), Eigen::Vector2d::Zero());
}

TEST(InterpolateField, ExactAtAnchors) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> px(0, 47);
  std::uniform_real_distribution<double> step(-6.0, 6.0);
  TrackSet tracks(60, 4, 48, 48);
  std::set<std::pair<int, int>> used;
  for (Index n = 0; n < 60; ++n) {
    int x, y;
    do {
      x = px(rng);
      y = px(rng);
    } while (!used.insert({x, y}).second);
    tracks.set(n, 0, {x, y}, true);
    for (int t = 1; t < 4; ++t) tracks.set(n, t, Eigen::Vector2d(x + step(rng), y + step(rng)), true);
  }
  const auto fields = interpolate_field(tracks, 48, 48);
  for (Index n = 0; n < 60; ++n)
    for (int t = 0; t < 4; ++t) {
      const int x = static_cast<int>(tracks.x(n, 0)), y = static_cast<int>(tracks.y(n, 0));
      EXPECT_NEAR(fields[t].dx(y, x), tracks.x(n, t) - x, 1e-5);
      EXPECT_NEAR(fields[t].dy(y, x), tracks.y(n, t) - y, 1e-5);
    }
}

TEST(InterpolateField, OffGridAnchorIsExactToo) {
  TrackSet tracks(3, 2, 16, 16);
  tracks.set(0, 0, {2.25, 3.5}, true);
  tracks.set(0, 1, {4.25, 3.5}, true);
  tracks.set(1, 0, {10.0, 10.0}, true);
  tracks.set(1, 1, {10.0, 12.0}, true);
  tracks.set(2, 0, {14.0, 1.0}, true);
  tracks.set(2, 1, {13.0, 1.0}, true);
  const TrackInterpolator field(tracks, 1);
  EXPECT_NEAR((field({2.25, 3.5}) - Eigen::Vector2d(2.0, 0.0)).norm(), 0.0, 1e-12);
  const Eigen::Vector2d mid = field({6.0, 6.0});
  EXPECT_GT(mid.x(), -1.0);
  EXPECT_LT(mid.x(), 2.0);
}

TEST(RenderWarp, StaticTracksReproduceFirstFrame) {
  const RgbImage first = testutil::noise_image(32, 24, 5);
  const TrackSet tracks = translating_grid(6, 32, 24, 6, {0.0, 0.0});
  const Video video = render_warp(first, tracks, {6, 32, 24});
  ASSERT_EQ(video.n_frames(), 6);
  for (const RgbImage& f : video.frames) EXPECT_TRUE(f == first);
}

TEST(RenderWarp, GlobalTranslationMatchesShiftOracle) {
  const RgbImage first = render_texture(ProceduralTexture(7), 40, 32);
  const TrackSet tracks = translating_grid(9, 40, 32, 5, {8.0, 0.0});
  const Video video = render_warp(first, tracks, {9, 40, 32});
  for (int t = 0; t < 9; ++t) {
    const int shift = t;  // 8 px over 8 intervals
    for (int y = 0; y < 32; ++y)
      for (int x = shift; x < 40; ++x)
        for (int c = 0; c < 3; ++c)
          ASSERT_EQ(video.frames[t].at(x, y, c), first.at(x - shift, y, c)) << t << " " << x << " " << y;
    // Border columns uncovered by the shift take their nearest covered colour.
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < shift; ++x)
        for (int c = 0; c < 3; ++c) ASSERT_EQ(video.frames[t].at(x, y, c), video.frames[t].at(shift, y, c));
  }
}

TEST(RenderWarp, FirstFrameIsInputAndDeterministic) {
  const RgbImage first = testutil::noise_image(24, 24, 8);
  const TrackSet tracks = translating_grid(5, 24, 24, 4, {3.3, -2.1});
  const Video a = render_warp(first, tracks, {5, 24, 24});
  const Video b = render_warp(first, tracks, {5, 24, 24});
  EXPECT_TRUE(a.frames[0] == first);
  EXPECT_EQ(psnr_frame(a.frames[0], first), kPsnrCap);
  for (int t = 0; t < 5; ++t) EXPECT_TRUE(a.frames[t] == b.frames[t]);
}

TEST(RenderWarp, DimensionMismatch) {
  const RgbImage first = testutil::noise_image(24, 20, 8);
  const TrackSet tracks = translating_grid(5, 24, 24, 4, {1, 0});
  EXPECT_THROW(render_warp(first, tracks, {5, 24, 24}), ShapeError);
  EXPECT_THROW(render_warp(testutil::noise_image(24, 24, 1), tracks, {6, 24, 24}), ShapeError);
}

TEST(RenderOverlay, DrawsOnlyNearTracks) {
  const RgbImage first(32, 32);
  TrackSet tracks(1, 4, 32, 32);
  for (int t = 0; t < 4; ++t) tracks.set(0, t, {10.0 + t, 10.0}, true);
  const RgbImage overlay = render_overlay(first, tracks);
  EXPECT_EQ(overlay.width, 32);
  EXPECT_FALSE(overlay == first);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(overlay.at(30, 30, c), 0);
}
