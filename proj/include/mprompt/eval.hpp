#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mprompt/image.hpp"
#include "mprompt/track_core.hpp"
#include "mprompt/tracker.hpp"

namespace mprompt {

// Mean L2 distance over samples visible in `conditioning`.
double epe(const TrackSet& conditioning, const TrackSet& estimated);

struct EpeSums {
  double sum = 0.0;
  std::size_t count = 0;
};
EpeSums epe_sums(const TrackSet& conditioning, const TrackSet& estimated);

inline constexpr double kPsnrCap = 100.0;

// 10 log10(255^2 / MSE) over all pixels and channels, capped at kPsnrCap.
double psnr_frame(const RgbImage& a, const RgbImage& b);
// Per-frame PSNR averaged over frames.
double psnr(const Video& a, const Video& b);

/// SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// L = 255, over fully-contained windows, averaged over the RGB channels.
double ssim_frame(const RgbImage& a, const RgbImage& b);
double ssim(const Video& a, const Video& b);

// ---------------------------------------------------------------------------
// Benchmark

struct BenchmarkItem {
  std::string name;
  std::string caption;
  RgbImage first_frame;
  Video gt_video;
  TrackSet gt_tracks;
};

// Produces a video from the first frame and the conditioning tracks.
using VideoGenerator = std::function<Video(const BenchmarkItem&, const TrackSet& conditioning, const VideoDims&)>;

VideoGenerator warp_generator();
VideoGenerator ground_truth_generator();

inline const std::vector<int> kDefaultDensities{1, 4, 16, 64, 512, 2048};

struct BenchmarkOptions {
  std::vector<int> densities = kDefaultDensities;
  std::uint64_t seed = 0;
  NccTrackerParams tracker;
  // Size of the fixed held-out subset of ground-truth tracks that every
  // density is also scored against (tracks visible at frame 0).
  int dense_eval_tracks = 256;
};

struct DensityRow {
  int density = 0;
  int items = 0;              // items that produced metrics
  double psnr = 0.0;
  double ssim = 0.0;
  double epe = 0.0;           // per-video mean vs conditioning, then averaged
  double epe_pooled = 0.0;    // pooled over every conditioning sample
  double epe_dense = 0.0;     // per-video mean vs held-out ground truth, averaged
};

struct ItemFailure {
  int density = 0;
  std::string item;
  std::string message;
};

struct BenchmarkReport {
  std::vector<DensityRow> rows;
  std::vector<ItemFailure> failures;

  std::string to_text() const;
  std::string to_json() const;
};

/// For every density: subsample each item's ground-truth tracks, generate,
/// then score PSNR/SSIM against the ground-truth video and EPE of the NCC
/// tracker's estimate. Generator or metric failures are recorded per item
/// and the run continues.
BenchmarkReport run_benchmark(const std::vector<BenchmarkItem>& dataset, const VideoGenerator& generator,
                              const BenchmarkOptions& options = {});

}  // namespace mprompt
