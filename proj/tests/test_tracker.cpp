#include <gtest/gtest.h>

#include "mprompt/eval.hpp"
#include "mprompt/synthetic.hpp"
#include "mprompt/tracker.hpp"
#include "test_util.hpp"

using namespace mprompt;

namespace {

// Textured square of side 24 moving by `step` per frame over a flat grey
// background.
Video square_video(int frames, const Eigen::Vector2d& start, const Eigen::Vector2d& step) {
  const ProceduralTexture texture(3);
  Video video;
  for (int t = 0; t < frames; ++t) {
    RgbImage img(80, 64);
    const Eigen::Vector2d origin = start + step * t;
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 80; ++x) {
        const double lx = x - origin.x(), ly = y - origin.y();
        const bool inside = lx >= 0 && lx < 24 && ly >= 0 && ly < 24;
        const Eigen::Vector3d c = inside ? texture(lx, ly) : Eigen::Vector3d(128, 128, 128);
        for (int k = 0; k < 3; ++k) img.at(x, y, k) = static_cast<std::uint8_t>(std::clamp(std::lround(c[k]), 0L, 255L));
      }
    video.frames.push_back(std::move(img));
  }
  return video;
}

Video shifted_texture_video(int frames, const Eigen::Vector2d& step, int w, int h) {
  const ProceduralTexture texture(12);
  Video video;
  for (int t = 0; t < frames; ++t) {
    RgbImage img(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const Eigen::Vector3d c = texture(x - step.x() * t, y - step.y() * t);
        for (int k = 0; k < 3; ++k) img.at(x, y, k) = static_cast<std::uint8_t>(std::clamp(std::lround(c[k]), 0L, 255L));
      }
    video.frames.push_back(std::move(img));
  }
  return video;
}

}  // namespace

TEST(NccTracker, StaticVideoGivesConstantVisibleTracks) {
  Video video;
  const RgbImage frame = render_texture(ProceduralTexture(4), 48, 40);
  video.frames.assign(6, frame);
  const std::vector<Eigen::Vector2d> queries{{10, 10}, {24.5, 20.25}, {36, 30}};
  const TrackSet tracks = track_ncc(video, queries).tracks;
  EXPECT_TRUE((tracks.visible == 1).all());
  for (Index n = 0; n < 3; ++n)
    for (int t = 0; t < 6; ++t) EXPECT_NEAR((tracks.position(n, t) - queries[n]).norm(), 0.0, 1e-9);
}

TEST(NccTracker, FollowsTranslatingSquareWithinOnePixel) {
  const Eigen::Vector2d start(10, 12), step(2.5, 1.25);
  const Video video = square_video(12, start, step);
  const std::vector<Eigen::Vector2d> queries{{22, 24}, {18, 20}, {26, 28}};
  const TrackSet tracks = track_ncc(video, queries).tracks;
  for (Index n = 0; n < 3; ++n)
    for (int t = 0; t < 12; ++t) {
      EXPECT_EQ(tracks.visible(n, t), 1);
      EXPECT_LE((tracks.position(n, t) - (queries[n] + step * t)).norm(), 1.0) << n << " " << t;
    }
}

TEST(NccTracker, FlatPatchBecomesInvisible) {
  const Video video = square_video(8, {40, 30}, {1, 0});
  const TrackSet tracks = track_ncc(video, {{12.0, 12.0}}).tracks;
  int lost = 0;
  for (int t = 1; t < 4; ++t) lost += tracks.visible(0, t) == 0;
  EXPECT_GE(lost, 1);
}

TEST(NccTracker, GlobalTranslationEpeBelowOnePixel) {
  for (const Eigen::Vector2d step : {Eigen::Vector2d(1.5, -0.75), Eigen::Vector2d(-3.2, 2.6), Eigen::Vector2d(6.0, 0.4)}) {
    const Video video = shifted_texture_video(6, step, 96, 80);
    std::vector<Eigen::Vector2d> queries;
    for (int y = 12; y < 70; y += 6)
      for (int x = 12; x < 86; x += 6) queries.emplace_back(x, y);
    // Ground truth counts only while the whole patch stays in frame.
    TrackSet gt(static_cast<Index>(queries.size()), 6, 96, 80);
    for (std::size_t n = 0; n < queries.size(); ++n)
      for (int t = 0; t < 6; ++t) {
        const Eigen::Vector2d p = queries[n] + step * t;
        gt.set(static_cast<Index>(n), t, p, p.x() >= 5 && p.x() <= 90 && p.y() >= 5 && p.y() <= 74);
      }
    const TrackSet est = track_ncc(video, queries).tracks;
    EXPECT_LE(epe(gt, est), 1.0) << step.transpose();
  }
}

TEST(NccTracker, ClampsBorderQueriesAndIsDeterministic) {
  Video video;
  video.frames.assign(3, render_texture(ProceduralTexture(9), 40, 40));
  const std::vector<Eigen::Vector2d> queries{{1.0, 1.0}, {20.0, 20.0}, {39.0, 10.0}};
  const NccTrackResult a = track_ncc(video, queries);
  const NccTrackResult b = track_ncc(video, queries);
  EXPECT_EQ(a.clamped_queries, 2);
  EXPECT_EQ(a.tracks, b.tracks);
  EXPECT_EQ(a.tracks.x(0, 0), 5.0);
  EXPECT_EQ(start_points(a.tracks)[1], Eigen::Vector2d(20.0, 20.0));
}
