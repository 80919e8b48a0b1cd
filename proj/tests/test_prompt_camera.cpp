#include <gtest/gtest.h>

#include <numbers>

#include "mprompt/errors.hpp"
#include "mprompt/prompt_camera.hpp"
#include "mprompt/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mprompt;

namespace {

DepthScene plane_scene(int w, int h, float depth, double tilt = 0.0) {
  DepthScene scene;
  scene.intrinsics = {static_cast<double>(w), static_cast<double>(w), 0.5 * w, 0.5 * h};
  scene.depth.resize(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) scene.depth(y, x) = depth + static_cast<float>(tilt * y / h);
  return scene;
}

CameraPath still_path(int frames) { return CameraPath(static_cast<std::size_t>(frames)); }

double pose_distance(const Pose& a, const Pose& b) {
  return (a.rotation - b.rotation).cwiseAbs().maxCoeff() + (a.translation - b.translation).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Unproject, PrincipalPoint) {
  DepthScene scene = plane_scene(16, 16, 2.0f);
  scene.intrinsics = {20.0, 22.0, 7.0, 9.0};
  const PointCloud cloud = unproject(scene);
  for (Index i = 0; i < cloud.size(); ++i) {
    if (cloud.source_pixels(0, i) == 7 && cloud.source_pixels(1, i) == 9)
      EXPECT_EQ(Eigen::Vector3d(cloud.points.col(i)), Eigen::Vector3d(0, 0, 2));
  }
}

TEST(Unproject, RoundTripEveryPixel) {
  const DepthScene scene = synthetic_depth_scene(128, 128);
  const PointCloud cloud = unproject(scene);
  ASSERT_EQ(cloud.size(), 128 * 128);
  for (Index i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector2d uv = project_point(cloud.intrinsics, cloud.points.col(i));
    EXPECT_LE((uv - cloud.source_pixels.col(i).cast<double>()).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(Unproject, PlaneIsPlanarAndStrided) {
  const PointCloud cloud = unproject(plane_scene(20, 12, 3.5f), 3);
  EXPECT_EQ(cloud.size(), 7 * 4);
  EXPECT_TRUE((cloud.points.row(2).array() == 3.5).all());
}

TEST(Unproject, SkipsInvalidDepth) {
  DepthScene scene = plane_scene(4, 4, 1.0f);
  scene.depth(0, 0) = 0.0f;
  scene.depth(2, 3) = -1.0f;
  scene.depth(3, 3) = std::numeric_limits<float>::quiet_NaN();
  const PointCloud cloud = unproject(scene);
  EXPECT_EQ(cloud.size(), 13);
  EXPECT_EQ(cloud.skipped_pixels, 3);
  EXPECT_THROW(unproject(scene, 0), RangeError);
}

TEST(SweepPaths, ZeroAngleIsReference) {
  for (auto make : {make_orbit_path, make_arc_path}) {
    const CameraPath path = make({{0.3, -0.2, 4.0}, 0.0, 12});
    ASSERT_EQ(path.size(), 12u);
    for (const Pose& p : path) EXPECT_LE(pose_distance(p, Pose{}), 1e-15);
  }
}

TEST(SweepPaths, FirstPoseReferenceAndRotationsValid) {
  for (auto make : {make_orbit_path, make_arc_path}) {
    const CameraPath path = make({{0.5, 0.2, 3.0}, 0.7, 20});
    EXPECT_EQ(path[0], Pose{});
    for (const Pose& p : path) EXPECT_TRUE(is_rotation(p.rotation, 1e-12));
  }
}

TEST(SweepPaths, FullOrbitIsPeriodic) {
  const CameraPath path = make_orbit_path({{0.2, 0.1, 2.5}, 2 * std::numbers::pi, 37});
  EXPECT_LE(pose_distance(path.back(), path.front()), 1e-6);
  const CameraPath arc = make_arc_path({{0.2, 0.1, 2.5}, 2 * std::numbers::pi, 37});
  EXPECT_LE(pose_distance(arc.back(), arc.front()), 1e-6);
}

TEST(SweepPaths, PivotDistanceConstant) {
  const PointCloud cloud = unproject(synthetic_depth_scene(48, 40), 2);
  const Eigen::Vector3d centroid = cloud.points.rowwise().mean();
  for (auto make : {make_orbit_path, make_arc_path}) {
    const CameraPath path = make({centroid, 1.3, 30});
    const double d0 = (path[0].center() - centroid).norm();
    for (const Pose& p : path) EXPECT_NEAR((p.center() - centroid).norm(), d0, 1e-9);
  }
}

TEST(SweepPaths, OrbitPositiveAngleMovesRight) {
  const CameraPath path = make_orbit_path({{0, 0, 4}, 0.5, 5});
  EXPECT_GT(path.back().center().x(), 0.0);
  const CameraPath arc = make_arc_path({{0, 0, 4}, 0.5, 5});
  EXPECT_LT(arc.back().center().y(), 0.0);  // up is -y
}

TEST(SweepPaths, ZeroRadiusIsDegenerate) {
  EXPECT_THROW(make_orbit_path({{0, 0, 0}, 1.0, 5}), DegenerateError);
  EXPECT_THROW(make_orbit_path({{0, 3, 0}, 1.0, 5}), DegenerateError);
  EXPECT_THROW(make_arc_path({{2, 0, 0}, 1.0, 5}), DegenerateError);
  EXPECT_THROW(make_orbit_path({{0, 0, 2}, 1.0, 0}), RangeError);
}

TEST(MouseCamera, CursorAtAnchorIsIdentity) {
  const DepthScene scene = synthetic_depth_scene(64, 64);
  MouseRecording rec;
  rec.samples.assign(10, {20.0, 30.0, true});
  for (const Pose& p : mouse_to_camera_path(rec, scene, {20.0, 30.0})) EXPECT_LE(pose_distance(p, Pose{}), 1e-12);
}

TEST(MouseCamera, AnchorReprojectsOntoCursor) {
  const DepthScene scene = synthetic_depth_scene(128, 128);
  const Eigen::Vector2d anchor(70.0, 50.0);
  MouseRecording rec;
  for (int t = 0; t < 40; ++t) rec.samples.push_back({70.0 + 25 * std::sin(0.2 * t), 50.0 + 0.8 * t, t > 2});
  const CameraPath path = mouse_to_camera_path(rec, scene, anchor);
  const Eigen::Vector3d point = unproject_pixel<double>(scene.intrinsics, 70.0, 50.0, scene.depth(50, 70));
  for (int t = 0; t < 40; ++t) {
    EXPECT_TRUE(path[t].rotation == Eigen::Matrix3d::Identity());
    EXPECT_EQ(path[t].center().z(), 0.0);
    const Eigen::Vector2d uv = project_point(scene.intrinsics, path[t].apply(point));
    EXPECT_LE((uv - rec.samples[t].position()).norm(), 1e-3);
  }
}

TEST(MouseCamera, TranslationScalesWithAnchorDepth) {
  const DepthScene near = plane_scene(64, 64, 2.0f);
  const DepthScene far = plane_scene(64, 64, 4.0f);
  MouseRecording rec;
  rec.samples = {{32.0, 32.0, true}, {42.0, 28.0, true}};
  const Eigen::Vector3d tn = mouse_to_camera_path(rec, near, {32.0, 32.0})[1].translation;
  const Eigen::Vector3d tf = mouse_to_camera_path(rec, far, {32.0, 32.0})[1].translation;
  EXPECT_NEAR((tf - 2.0 * tn).norm(), 0.0, 1e-12);
  EXPECT_GT(tn.norm(), 0.0);
}

TEST(MouseCamera, InvalidAnchor) {
  DepthScene scene = plane_scene(16, 16, 1.0f);
  scene.depth(4, 4) = 0.0f;
  MouseRecording rec;
  rec.samples.assign(3, {4.0, 4.0, true});
  EXPECT_THROW(mouse_to_camera_path(rec, scene, {4.0, 4.0}), InvariantError);
  EXPECT_THROW(mouse_to_camera_path(rec, scene, {40.0, 4.0}), InvariantError);
}

TEST(ProjectTracks, StaticCameraKeepsEveryTrackAtItsPixel) {
  const DepthScene scene = plane_scene(40, 32, 3.0f, 0.2);
  const PointCloud cloud = unproject(scene);
  const TrackSet tracks = project_tracks(cloud, still_path(6), default_zbuffer_params(scene), {6, 40, 32});
  ASSERT_EQ(tracks.n_tracks(), 40 * 32);
  EXPECT_TRUE((tracks.visible == 1).all());
  for (Index i = 0; i < tracks.n_tracks(); ++i)
    for (int t = 0; t < 6; ++t) {
      EXPECT_NEAR(tracks.x(i, t), cloud.source_pixels(0, i), 1e-9);
      EXPECT_NEAR(tracks.y(i, t), cloud.source_pixels(1, i), 1e-9);
    }
  const Displacements d = to_displacements(tracks);
  EXPECT_TRUE((d.dx == 0.0).all() && (d.dy == 0.0).all());
}

TEST(ProjectTracks, NearPointOccludesFarNeighbour) {
  PointCloud cloud;
  cloud.intrinsics = {10.0, 10.0, 5.0, 5.0};
  cloud.points.resize(3, 2);
  cloud.points.col(0) = unproject_pixel<double>(cloud.intrinsics, 4.0, 4.0, 1.0);
  cloud.points.col(1) = unproject_pixel<double>(cloud.intrinsics, 5.0, 4.0, 5.0);
  cloud.source_pixels = Eigen::Matrix2Xi::Zero(2, 2);
  TrackSet tracks = project_tracks(cloud, still_path(1), {1, 0.1}, {1, 10, 10});
  EXPECT_EQ(tracks.visible(0, 0), 1);
  EXPECT_EQ(tracks.visible(1, 0), 0);
  EXPECT_NEAR(tracks.x(1, 0), 5.0, 1e-12);  // occluded points keep their projection
  tracks = project_tracks(cloud, still_path(1), {1, 10.0}, {1, 10, 10});
  EXPECT_EQ(tracks.visible(0, 0), 1);
  EXPECT_EQ(tracks.visible(1, 0), 1);
  tracks = project_tracks(cloud, still_path(1), {0, 0.1}, {1, 10, 10});
  EXPECT_EQ(tracks.visible(1, 0), 1);  // outside a zero-radius window
}

TEST(ProjectTracks, BehindCameraInvisibleAndHeld) {
  PointCloud cloud;
  cloud.intrinsics = {10.0, 10.0, 5.0, 5.0};
  cloud.points = Eigen::Matrix3Xd(3, 1);
  cloud.points.col(0) << 0.0, 0.0, 1.0;
  cloud.source_pixels = Eigen::Matrix2Xi::Constant(2, 1, 5);
  CameraPath path(3);
  path[1].translation << 0.1, 0.0, 0.0;
  path[2].translation << 0.0, 0.0, -2.0;
  const TrackSet tracks = project_tracks(cloud, path, {1, 0.1}, {3, 10, 10});
  EXPECT_EQ(tracks.visible(0, 1), 1);
  EXPECT_EQ(tracks.visible(0, 2), 0);
  EXPECT_EQ(tracks.position(0, 2), tracks.position(0, 1));
}

TEST(ProjectTracks, ZBufferMatchesPairwiseOracle) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pix(-2.0, 26.0), depth(0.5, 6.0), coin(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 200);
    const int radius = static_cast<int>(rng() % 3);
    const double slack = coin(rng) * 1.5;
    std::vector<double> u(n), v(n), z(n);
    Eigen::Matrix2Xd pixels(2, n);
    Eigen::VectorXd dz(n);
    for (int i = 0; i < n; ++i) {
      u[i] = pix(rng);
      v[i] = pix(rng) * 0.8;
      z[i] = coin(rng) < 0.05 ? -depth(rng) : depth(rng);
      pixels.col(i) << u[i], v[i];
      dz(i) = z[i];
    }
    EXPECT_EQ(zbuffer_visibility(pixels, dz, {radius, slack}, 24, 20), oracle::zbuffer(u, v, z, radius, slack, 24, 20))
        << "trial " << trial;
  }
}

TEST(ProjectTracks, PureRotationIgnoresDepthScale) {
  const DepthScene a = synthetic_depth_scene(48, 48);
  DepthScene b = a;
  b.depth *= 3.0f;
  CameraPath path(8);
  for (int t = 0; t < 8; ++t)
    path[t].rotation = Eigen::AngleAxisd(0.02 * t, Eigen::Vector3d(0.3, 1.0, 0.1).normalized()).toRotationMatrix();
  const TrackSet ta = project_tracks(unproject(a), path, {1, 0.05}, {8, 48, 48});
  const TrackSet tb = project_tracks(unproject(b), path, {1, 0.15}, {8, 48, 48});
  EXPECT_LE((ta.x - tb.x).abs().maxCoeff(), 1e-9);
  EXPECT_LE((ta.y - tb.y).abs().maxCoeff(), 1e-9);
}

TEST(ProjectTracks, SubsampleCommutesWithProjection) {
  const DepthScene scene = synthetic_depth_scene(40, 40);
  const PointCloud cloud = unproject(scene);
  const CameraPath path = make_orbit_path({unproject_pixel<double>(scene.intrinsics, 20.0, 20.0, scene.depth(20, 20)), 0.4, 6});
  const ZBufferParams open{0, 1e9};
  const VideoDims dims{6, 40, 40};
  const std::vector<Index> keep = subsample_indices(cloud.size(), 300, 17);
  PointCloud sub;
  sub.intrinsics = cloud.intrinsics;
  sub.points.resize(3, 300);
  sub.source_pixels.resize(2, 300);
  for (Index i = 0; i < 300; ++i) {
    sub.points.col(i) = cloud.points.col(keep[i]);
    sub.source_pixels.col(i) = cloud.source_pixels.col(keep[i]);
  }
  EXPECT_EQ(project_tracks(sub, path, open, dims), subsample_tracks(project_tracks(cloud, path, open, dims), 300, 17));
}

TEST(ProjectTracks, PathLengthMismatch) {
  const PointCloud cloud = unproject(plane_scene(8, 8, 1.0f));
  EXPECT_THROW(project_tracks(cloud, still_path(3), {1, 0.1}, {4, 8, 8}), ShapeError);
}

TEST(ExpandCamera, OrbitSubsamplesAndIsDeterministic) {
  const DepthScene scene = synthetic_depth_scene(64, 64);
  CameraPromptSpec spec;
  spec.angle_degrees = 20.0;
  spec.max_tracks = 200;
  spec.seed = 4;
  const TrackSet a = expand_camera(scene, spec, 10);
  EXPECT_EQ(a.n_tracks(), 200);
  EXPECT_EQ(a, expand_camera(scene, spec, 10));
  spec.max_tracks = 0;
  EXPECT_EQ(expand_camera(scene, spec, 10).n_tracks(), 32 * 32);
}

TEST(ExpandCamera, MouseNeedsMatchingRecording) {
  const DepthScene scene = synthetic_depth_scene(32, 32);
  CameraPromptSpec spec;
  spec.path = parse_camera_path_kind("mouse");
  EXPECT_THROW(expand_camera(scene, spec, 5), InvariantError);
  const MouseRecording rec = testutil::drag(4, 0, 3, 15.5, 15.5, 20, 15.5);
  EXPECT_THROW(expand_camera(scene, spec, 5, &rec), ShapeError);
  const MouseRecording ok = testutil::drag(5, 0, 4, 15.5, 15.5, 20, 15.5);
  EXPECT_EQ(expand_camera(scene, spec, 5, &ok).n_frames(), 5);
  EXPECT_THROW(parse_camera_path_kind("dolly"), ParseError);
}
