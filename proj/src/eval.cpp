#include "mprompt/eval.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "mprompt/errors.hpp"
#include "mprompt/synth_warp.hpp"

namespace mprompt {

EpeSums epe_sums(const TrackSet& conditioning, const TrackSet& estimated) {
  if (conditioning.n_tracks() != estimated.n_tracks() || conditioning.n_frames() != estimated.n_frames()) {
    throw ShapeError("EPE needs matching track sets: " + std::to_string(conditioning.n_tracks()) + "x" +
                         std::to_string(conditioning.n_frames()) + " vs " + std::to_string(estimated.n_tracks()) +
                         "x" + std::to_string(estimated.n_frames()),
                     "tracks");
  }
  EpeSums s;
  for (Index n = 0; n < conditioning.n_tracks(); ++n) {
    for (Index t = 0; t < conditioning.n_frames(); ++t) {
      if (!conditioning.visible(n, t)) continue;
      s.sum += (conditioning.position(n, t) - estimated.position(n, t)).norm();
      ++s.count;
    }
  }
  return s;
}

double epe(const TrackSet& conditioning, const TrackSet& estimated) {
  const EpeSums s = epe_sums(conditioning, estimated);
  if (s.count == 0) throw UndefinedMetricError("EPE is undefined without visible conditioning samples", "visibility");
  return s.sum / static_cast<double>(s.count);
}

namespace {

void check_same_size(const RgbImage& a, const RgbImage& b) {
  if (a.width != b.width || a.height != b.height)
    throw ShapeError("frames differ in size: " + std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                         std::to_string(b.width) + "x" + std::to_string(b.height),
                     "frames");
}

void check_same_length(const Video& a, const Video& b) {
  if (a.n_frames() != b.n_frames())
    throw ShapeError("videos differ in length: " + std::to_string(a.n_frames()) + " vs " + std::to_string(b.n_frames()),
                     "n_frames");
  if (a.n_frames() == 0) throw ShapeError("videos have no frames", "n_frames");
}

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

std::array<double, kSsimWindow> ssim_kernel() {
  std::array<double, kSsimWindow> k{};
  double sum = 0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    k[i] = std::exp(-d * d / (2 * kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable Gaussian filter keeping only fully-contained windows.
Eigen::ArrayXXd filter_valid(const LumaImage& img) {
  static const auto k = ssim_kernel();
  const Index h = img.rows(), w = img.cols();
  const Index ow = w - kSsimWindow + 1, oh = h - kSsimWindow + 1;
  Eigen::ArrayXXd horiz(h, ow);
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < ow; ++x) {
      double s = 0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[i] * img(y, x + i);
      horiz(y, x) = s;
    }
  Eigen::ArrayXXd out(oh, ow);
  for (Index y = 0; y < oh; ++y)
    for (Index x = 0; x < ow; ++x) {
      double s = 0;
      for (int i = 0; i < kSsimWindow; ++i) s += k[i] * horiz(y + i, x);
      out(y, x) = s;
    }
  return out;
}

double ssim_channel(const LumaImage& x, const LumaImage& y) {
  constexpr double c1 = (0.01 * 255) * (0.01 * 255);
  constexpr double c2 = (0.03 * 255) * (0.03 * 255);
  const Eigen::ArrayXXd mu_x = filter_valid(x);
  const Eigen::ArrayXXd mu_y = filter_valid(y);
  const Eigen::ArrayXXd var_x = filter_valid(x * x) - mu_x * mu_x;
  const Eigen::ArrayXXd var_y = filter_valid(y * y) - mu_y * mu_y;
  const Eigen::ArrayXXd cov = filter_valid(x * y) - mu_x * mu_y;
  const Eigen::ArrayXXd map =
      ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) / ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
  return map.mean();
}

}  // namespace

double psnr_frame(const RgbImage& a, const RgbImage& b) {
  check_same_size(a, b);
  if (a.data.empty()) throw ShapeError("empty frame", "frames");
  double sq = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - b.data[i];
    sq += d * d;
  }
  const double mse = sq / static_cast<double>(a.data.size());
  if (mse == 0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double psnr(const Video& a, const Video& b) {
  check_same_length(a, b);
  double sum = 0;
  for (int t = 0; t < a.n_frames(); ++t) sum += psnr_frame(a.frames[t], b.frames[t]);
  return sum / a.n_frames();
}

double ssim_frame(const RgbImage& a, const RgbImage& b) {
  check_same_size(a, b);
  if (a.width < kSsimWindow || a.height < kSsimWindow)
    throw RangeError("SSIM needs frames of at least 11x11 pixels", "frames");
  double sum = 0;
  for (int c = 0; c < 3; ++c) sum += ssim_channel(channel(a, c), channel(b, c));
  return sum / 3.0;
}

double ssim(const Video& a, const Video& b) {
  check_same_length(a, b);
  double sum = 0;
  for (int t = 0; t < a.n_frames(); ++t) sum += ssim_frame(a.frames[t], b.frames[t]);
  return sum / a.n_frames();
}

// ---------------------------------------------------------------------------

VideoGenerator warp_generator() {
  return [](const BenchmarkItem& item, const TrackSet& conditioning, const VideoDims& dims) {
    return render_warp(item.first_frame, conditioning, dims, item.gt_video.fps);
  };
}

VideoGenerator ground_truth_generator() {
  return [](const BenchmarkItem& item, const TrackSet&, const VideoDims&) { return item.gt_video; };
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (a + 1) + 0xBF58476D1CE4E5B9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TrackSet dense_eval_set(const BenchmarkItem& item, int limit, std::uint64_t seed) {
  std::vector<Index> visible_at_start;
  for (Index n = 0; n < item.gt_tracks.n_tracks(); ++n)
    if (item.gt_tracks.n_frames() > 0 && item.gt_tracks.visible(n, 0)) visible_at_start.push_back(n);
  const TrackSet candidates = select_tracks(item.gt_tracks, visible_at_start);
  if (limit <= 0 || candidates.n_tracks() <= limit) return candidates;
  return subsample_tracks(candidates, limit, seed);
}

}  // namespace

BenchmarkReport run_benchmark(const std::vector<BenchmarkItem>& dataset, const VideoGenerator& generator,
                              const BenchmarkOptions& options) {
  BenchmarkReport report;
  std::vector<TrackSet> eval_sets;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    eval_sets.push_back(dense_eval_set(dataset[i], options.dense_eval_tracks, mix_seed(options.seed, i, 0)));

  for (int density : options.densities) {
    DensityRow row;
    row.density = density;
    EpeSums pooled;
    double epe_dense_sum = 0;
    int epe_dense_items = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const BenchmarkItem& item = dataset[i];
      try {
        if (density < 1) throw RangeError("density must be >= 1", "densities");
        const VideoDims dims{item.gt_video.n_frames(), item.gt_video.width(), item.gt_video.height()};
        const Index k = std::min<Index>(density, item.gt_tracks.n_tracks());
        const TrackSet conditioning =
            subsample_tracks(item.gt_tracks, k, mix_seed(options.seed, i, static_cast<std::uint64_t>(density)));
        const Video generated = generator(item, conditioning, dims);
        const double p = psnr(generated, item.gt_video);
        const double s = ssim(generated, item.gt_video);
        const TrackSet estimated = track_ncc(generated, start_points(conditioning), options.tracker).tracks;
        const EpeSums e = epe_sums(conditioning, estimated);
        if (e.count == 0) throw UndefinedMetricError("no visible conditioning samples", "visibility");
        row.psnr += p;
        row.ssim += s;
        row.epe += e.sum / static_cast<double>(e.count);
        pooled.sum += e.sum;
        pooled.count += e.count;
        ++row.items;
        const TrackSet& held_out = eval_sets[i];
        if (held_out.n_tracks() > 0) {
          const TrackSet est_dense = track_ncc(generated, start_points(held_out), options.tracker).tracks;
          const EpeSums d = epe_sums(held_out, est_dense);
          if (d.count > 0) {
            epe_dense_sum += d.sum / static_cast<double>(d.count);
            ++epe_dense_items;
          }
        }
      } catch (const std::exception& ex) {
        report.failures.push_back({density, item.name, ex.what()});
      }
    }
    if (row.items > 0) {
      row.psnr /= row.items;
      row.ssim /= row.items;
      row.epe /= row.items;
      row.epe_pooled = pooled.sum / static_cast<double>(pooled.count);
    } else {
      row.psnr = row.ssim = row.epe = row.epe_pooled = std::nan("");
    }
    row.epe_dense = epe_dense_items > 0 ? epe_dense_sum / epe_dense_items : std::nan("");
    report.rows.push_back(row);
  }
  return report;
}

std::string BenchmarkReport::to_text() const {
  std::ostringstream out;
  char line[256];
  out << "# densities:";
  for (std::size_t i = 0; i < rows.size(); ++i) out << (i ? ", " : " ") << rows[i].density;
  out << "\n";
  std::snprintf(line, sizeof line, "%-10s %8s %7s %9s %9s %8s %12s %11s\n", "# Tracks", "PSNR", "SSIM", "LPIPS",
                "FVD", "EPE", "EPE(pooled)", "EPE(dense)");
  out << line;
  for (const DensityRow& r : rows) {
    const std::string label = "N = " + std::to_string(r.density);
    std::snprintf(line, sizeof line, "%-10s %8.3f %7.3f %9s %9s %8.3f %12.3f %11.3f\n", label.c_str(), r.psnr, r.ssim,
                  "external", "external", r.epe, r.epe_pooled, r.epe_dense);
    out << line;
  }
  for (const ItemFailure& f : failures) out << "failed: N = " << f.density << " item " << f.item << ": " << f.message << "\n";
  return out.str();
}

std::string BenchmarkReport::to_json() const {
  using nlohmann::json;
  auto number = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json rows_json = json::object();
  for (const DensityRow& r : rows) {
    rows_json[std::to_string(r.density)] = {{"items", r.items},
                                            {"psnr", number(r.psnr)},
                                            {"ssim", number(r.ssim)},
                                            {"lpips", "external"},
                                            {"fvd", "external"},
                                            {"epe", number(r.epe)},
                                            {"epe_pooled", number(r.epe_pooled)},
                                            {"epe_dense", number(r.epe_dense)}};
  }
  json fails = json::array();
  for (const ItemFailure& f : failures) fails.push_back({{"density", f.density}, {"item", f.item}, {"error", f.message}});
  json densities = json::array();
  for (const DensityRow& r : rows) densities.push_back(r.density);
  return json{{"densities", densities}, {"rows", rows_json}, {"failures", fails}}.dump(2) + "\n";
}

}  // namespace mprompt
