#include <gtest/gtest.h>

#include <cstring>

#include "mprompt/errors.hpp"
#include "mprompt/io_formats.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mprompt;

namespace {

TrackSet f32_tracks(std::mt19937_64& rng, Index n, Index t) {
  TrackSet tracks = oracle::random_tracks(rng, n, t, 64, 48);
  tracks.x = tracks.x.cast<float>().cast<double>();
  tracks.y = tracks.y.cast<float>().cast<double>();
  return tracks;
}

}  // namespace

TEST(TrackFile, LengthFormula) {
  const TrackSet tracks(2, 3, 16, 16);
  EXPECT_EQ(encode_tracks(tracks).size(), 78u);
}

TEST(TrackFile, HeaderLayout) {
  TrackSet tracks(1, 1, 640, 480);
  tracks.set(0, 0, {1.5, -2.0}, true);
  const Bytes b = encode_tracks(tracks);
  ASSERT_EQ(b.size(), 33u);
  EXPECT_EQ(std::memcmp(b.data(), "MPTK", 4), 0);
  const std::uint8_t version[4] = {1, 0, 0, 0};
  EXPECT_EQ(std::memcmp(b.data() + 4, version, 4), 0);
  EXPECT_EQ(b[16], 640 & 0xff);
  EXPECT_EQ(b[17], 640 >> 8);
  float x = 0;
  std::memcpy(&x, b.data() + 24, 4);
  EXPECT_EQ(x, 1.5f);
  EXPECT_EQ(b[32], 1);
}

TEST(TrackFile, RoundTripIsExact) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const TrackSet tracks = f32_tracks(rng, static_cast<Index>(rng() % 7), static_cast<Index>(1 + rng() % 6));
    EXPECT_EQ(decode_tracks(encode_tracks(tracks)), tracks);
  }
}

TEST(TrackFile, TruncationAlwaysRejectedWithOffset) {
  std::mt19937_64 rng(4);
  const Bytes full = encode_tracks(f32_tracks(rng, 3, 4));
  for (std::size_t len = 0; len < full.size(); ++len) {
    const Bytes cut(full.begin(), full.begin() + static_cast<long>(len));
    try {
      decode_tracks(cut);
      FAIL() << "accepted truncated file of " << len << " bytes";
    } catch (const ParseError& e) {
      EXPECT_GE(e.offset(), 0) << len;
      EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
    }
  }
}

TEST(TrackFile, RejectsBadContent) {
  std::mt19937_64 rng(6);
  const Bytes good = encode_tracks(f32_tracks(rng, 2, 2));
  Bytes bad = good;
  bad[0] = 'X';
  EXPECT_THROW(decode_tracks(bad), ParseError);
  bad = good;
  bad[4] = 2;
  EXPECT_THROW(decode_tracks(bad), ParseError);
  bad = good;
  bad[24 + 8] = 3;
  try {
    decode_tracks(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 32);
    EXPECT_EQ(e.field(), "visible");
  }
  bad = good;
  const float inf = std::numeric_limits<float>::infinity();
  std::memcpy(bad.data() + 24 + 9, &inf, 4);
  EXPECT_THROW(decode_tracks(bad), ParseError);
  bad = good;
  bad.push_back(0);
  EXPECT_THROW(decode_tracks(bad), ParseError);
}

TEST(TrackFile, WriteReadFile) {
  testutil::TempDir dir("tracks");
  std::mt19937_64 rng(3);
  const TrackSet tracks = f32_tracks(rng, 4, 5);
  write_tracks(dir / "t.mptk", tracks);
  EXPECT_EQ(read_tracks(dir / "t.mptk"), tracks);
}

TEST(DepthFile, PfmRoundTripBothEndiannesses) {
  DepthScene scene;
  scene.intrinsics = {100.0, 110.0, 31.5, 23.5};
  scene.depth.resize(3, 4);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x) scene.depth(y, x) = 1.0f + 0.25f * x + 2.0f * y;
  const Bytes le = encode_pfm(scene);
  EXPECT_TRUE(decode_pfm(le).depth.isApprox(scene.depth, 0.0f));

  // Big-endian variant: positive scale, byte-swapped samples.
  const std::string header = "Pf\n4 3\n1.0\n";
  Bytes be(header.begin(), header.end());
  const std::size_t body = le.size() - 48;
  for (std::size_t i = body; i < le.size(); i += 4)
    for (int k = 3; k >= 0; --k) be.push_back(le[i + static_cast<std::size_t>(k)]);
  const DepthScene back = decode_pfm(be);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 4; ++x) EXPECT_EQ(back.depth(y, x), scene.depth(y, x));
}

TEST(DepthFile, SceneWithSidecar) {
  testutil::TempDir dir("depth");
  DepthScene scene;
  scene.intrinsics = {120.0, 121.0, 63.5, 62.0};
  scene.depth = decltype(scene.depth)::Constant(8, 8, 2.5f);
  write_depth_scene(dir / "d.pfm", scene);
  EXPECT_TRUE(std::filesystem::exists(dir / "d.json"));
  const DepthScene back = read_depth_scene(dir / "d.pfm");
  EXPECT_EQ(back.intrinsics.fx, 120.0);
  EXPECT_EQ(back.intrinsics.cy, 62.0);
  EXPECT_TRUE((back.depth == scene.depth).all());
}

TEST(DepthFile, RejectsInvalidDepthAndIntrinsics) {
  DepthScene scene;
  scene.intrinsics = {100.0, 100.0, 2.0, 2.0};
  scene.depth = decltype(scene.depth)::Constant(4, 4, 1.0f);
  scene.depth(1, 2) = -1.0f;
  const Bytes pfm = encode_pfm(scene);
  EXPECT_THROW(decode_depth_scene(pfm, encode_intrinsics(scene.intrinsics)), Error);
  scene.depth(1, 2) = 1.0f;
  EXPECT_THROW(decode_depth_scene(encode_pfm(scene), R"({"fx": 0, "fy": 1, "cx": 0, "cy": 0})"), Error);
  EXPECT_THROW(decode_depth_scene(encode_pfm(scene), R"({"fx": 1, "fy": 1})"), ParseError);
  const Bytes cut(pfm.begin(), pfm.end() - 3);
  EXPECT_THROW(decode_pfm(cut), ParseError);
}

TEST(CameraPathFile, RoundTrip) {
  CameraPath path(3);
  path[1].rotation = Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitY()).toRotationMatrix();
  path[1].translation = {0.1, -0.2, 0.3};
  path[2].rotation = Eigen::AngleAxisd(-1.1, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  const CameraPath back = decode_camera_path(encode_camera_path(path));
  ASSERT_EQ(back.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_TRUE(back[i].rotation == path[i].rotation);
    EXPECT_TRUE(back[i].translation == path[i].translation);
  }
}

TEST(CameraPathFile, RejectsReflection) {
  CameraPath path(1);
  path[0].rotation = Eigen::Matrix3d::Identity();
  path[0].rotation(2, 2) = -1.0;
  try {
    decode_camera_path(encode_camera_path(path));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "poses[0].rotation");
  }
}

TEST(CameraPathFile, RejectsNonOrthonormal) {
  EXPECT_THROW(decode_camera_path(R"({"poses":[{"rotation":[1,0,0,0,1,0,0,0,1.001],"translation":[0,0,0]}]})"),
               ParseError);
  EXPECT_THROW(decode_camera_path(R"({"poses":[{"rotation":[1,0,0],"translation":[0,0,0]}]})"), ParseError);
  EXPECT_THROW(decode_camera_path("not json"), ParseError);
}

TEST(VideoFrames, RoundTripAndMetadata) {
  testutil::TempDir dir("video");
  Video video;
  video.fps = 16.0;
  for (int t = 0; t < 3; ++t) video.frames.push_back(testutil::noise_image(9, 7, static_cast<std::uint64_t>(t)));
  write_video(dir.path(), video);
  EXPECT_TRUE(std::filesystem::exists(dir / "frame_00002.png"));
  const Video back = read_video(dir.path());
  ASSERT_EQ(back.n_frames(), 3);
  EXPECT_EQ(back.fps, 16.0);
  for (int t = 0; t < 3; ++t) EXPECT_TRUE(back.frames[t] == video.frames[t]);
}

TEST(VideoFrames, RejectsMismatchedMetadata) {
  testutil::TempDir dir("video_bad");
  Video video;
  for (int t = 0; t < 2; ++t) video.frames.push_back(testutil::noise_image(5, 5, 1));
  write_video(dir.path(), video);
  std::filesystem::remove(dir / "frame_00001.png");
  EXPECT_THROW(read_video(dir.path()), ParseError);
  write_png(dir / "frame_00001.png", testutil::noise_image(6, 5, 1));
  EXPECT_THROW(read_video(dir.path()), ParseError);
}

TEST(MouseFile, RoundTripAndCount) {
  const MouseRecording rec = testutil::drag(80, 5, 20, 10, 10, 20, 10);
  const MouseRecording back = decode_mouse_recording(encode_mouse_recording(rec), 80);
  EXPECT_EQ(back, rec);
  EXPECT_THROW(decode_mouse_recording(encode_mouse_recording(rec), 79), ParseError);
  EXPECT_THROW(decode_mouse_recording(R"({"fps": 16, "samples": [{"x": 1}]})"), ParseError);
}

TEST(VolumeFile, RoundTrip) {
  ConditioningVolume vol(2, 3, 4, 6);
  for (std::size_t i = 0; i < vol.values.size(); ++i) vol.values[i] = 0.5f * static_cast<float>(i);
  const Bytes b = encode_volume(vol, 7, 16384);
  EXPECT_EQ(b.size(), kVolumeHeaderBytes + 4 * vol.values.size());
  const VolumeFile back = decode_volume(b);
  EXPECT_EQ(back.volume.values, vol.values);
  EXPECT_EQ(back.volume.frames, 2);
  EXPECT_EQ(back.volume.channels, 6);
  EXPECT_EQ(back.n_tracks, 7u);
  EXPECT_EQ(back.max_index, 16384u);
  const Bytes cut(b.begin(), b.end() - 1);
  EXPECT_THROW(decode_volume(cut), ParseError);
}

TEST(Png, RoundTripAndGarbage) {
  const RgbImage img = testutil::noise_image(13, 11, 9);
  EXPECT_TRUE(decode_png(encode_png(img)) == img);
  const Bytes junk = {1, 2, 3, 4, 5};
  EXPECT_THROW(decode_png(junk), ParseError);
}
