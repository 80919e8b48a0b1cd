// mprompt: command-line front end for the motion-prompt toolkit.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mprompt/errors.hpp"
#include "mprompt/eval.hpp"
#include "mprompt/io_formats.hpp"
#include "mprompt/prompt_camera.hpp"
#include "mprompt/prompt_compose.hpp"
#include "mprompt/prompt_mouse.hpp"
#include "mprompt/prompt_primitive.hpp"
#include "mprompt/service.hpp"
#include "mprompt/synth_warp.hpp"
#include "mprompt/synthetic.hpp"
#include "mprompt/tracker.hpp"

namespace fs = std::filesystem;
using namespace mprompt;

namespace {

std::vector<double> parse_numbers(const std::string& text, char sep, std::size_t n, const std::string& field) {
  std::vector<double> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, sep);) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ParseError("not a number: '" + item + "'", field);
    out.push_back(v);
  }
  if (n != 0 && out.size() != n) throw ParseError("expected " + std::to_string(n) + " values in '" + text + "'", field);
  return out;
}

VideoDims parse_dims(const std::string& text, const std::string& field) {
  const auto v = parse_numbers(text, 'x', 3, field);
  for (double d : v)
    if (d < 1 || d != static_cast<int>(d)) throw ParseError("dimensions must be positive integers: '" + text + "'", field);
  return {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])};
}

Rect parse_rect(const std::string& text, const std::string& field) {
  const auto v = parse_numbers(text, ',', 4, field);
  return {v[0], v[1], v[2], v[3]};
}

Eigen::Vector2d parse_point(const std::string& text, const std::string& field) {
  const auto v = parse_numbers(text, ',', 2, field);
  return {v[0], v[1]};
}

const char* error_kind(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "parse error";
  if (dynamic_cast<const ShapeError*>(&e)) return "shape error";
  if (dynamic_cast<const RangeError*>(&e)) return "range error";
  if (dynamic_cast<const CapacityError*>(&e)) return "capacity error";
  if (dynamic_cast<const DegenerateError*>(&e)) return "degenerate input";
  if (dynamic_cast<const InvariantError*>(&e)) return "invariant violation";
  if (dynamic_cast<const UndefinedMetricError*>(&e)) return "undefined metric";
  return "error";
}

struct Globals {
  std::uint64_t seed = 0;
  std::string dims_text = "80x128x128";
  VideoDims dims() const { return parse_dims(dims_text, "--dims"); }
};

void write_text_or_stdout(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file_text(path, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion-prompt toolkit: expand, encode, render, track and evaluate point-track prompts"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--dims", g.dims_text, "Video extent as FRAMESxWIDTHxHEIGHT")->capture_default_str();

  std::function<void()> action;

  // encode ------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("encode", "Encode tracks into a conditioning volume");
    static std::string tracks_path, out_path;
    static int channels = 64, max_index = 16384;
    cmd->add_option("--tracks", tracks_path, "Input track file")->required();
    cmd->add_option("--out", out_path, "Output volume file")->required();
    cmd->add_option("--channels", channels, "Embedding channels (even)")->capture_default_str();
    cmd->add_option("--max-index", max_index, "Size of the embedding id pool")->capture_default_str();
    cmd->callback([&] {
      action = [&] {
        const TrackSet tracks = read_tracks(tracks_path);
        const EmbeddingTable table = assign_embeddings(tracks.n_tracks(), channels, max_index, g.seed);
        const ConditioningVolume vol =
            encode_conditioning(tracks, table, static_cast<int>(tracks.n_frames()), tracks.height, tracks.width);
        write_file_bytes(out_path, encode_volume(vol, static_cast<std::uint32_t>(tracks.n_tracks()),
                                                 static_cast<std::uint32_t>(max_index)));
        std::printf("encoded %lld tracks into %dx%dx%dx%d volume (%lld nonzero cells)\n",
                    static_cast<long long>(tracks.n_tracks()), vol.frames, vol.height, vol.width, vol.channels,
                    static_cast<long long>(vol.nonzero_cells()));
      };
    });
  }

  // expand-mouse ------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("expand-mouse", "Expand a mouse recording into grid drag tracks");
    static std::string rec_path, out_path, pins;
    static GridSpec spec;
    static int pin_stride = 16;
    cmd->add_option("--recording", rec_path, "Mouse recording JSON")->required();
    cmd->add_option("--out", out_path, "Output track file")->required();
    cmd->add_option("--grid-side", spec.grid_side, "Grid points per side")->capture_default_str();
    cmd->add_option("--stride", spec.stride, "Grid spacing in pixels")->capture_default_str();
    cmd->add_flag("--persist", spec.persist, "Keep grids visible outside their drag");
    cmd->add_option("--pins", pins, "Static pin region x0,y0,x1,y1");
    cmd->add_option("--pin-stride", pin_stride, "Static pin spacing")->capture_default_str();
    cmd->callback([&] {
      action = [&] {
        const VideoDims dims = g.dims();
        const MouseRecording rec = read_mouse_recording(rec_path);
        if (!pins.empty()) spec.static_pins = PinSpec{parse_rect(pins, "--pins"), pin_stride};
        const TrackSet tracks = expand_drag_to_grid(rec, spec, dims);
        write_tracks(out_path, tracks);
        std::printf("wrote %lld tracks x %lld frames\n", static_cast<long long>(tracks.n_tracks()),
                    static_cast<long long>(tracks.n_frames()));
      };
    });
  }

  // expand-sphere -----------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("expand-sphere", "Spin a virtual sphere with mouse drags");
    static std::string rec_path, out_path, center;
    static SphereSpec sphere;
    cmd->add_option("--recording", rec_path, "Mouse recording JSON")->required();
    cmd->add_option("--out", out_path, "Output track file")->required();
    cmd->add_option("--center", center, "Sphere centre x,y (default: frame centre)");
    cmd->add_option("--radius", sphere.radius, "Sphere radius in pixels")->capture_default_str();
    cmd->add_option("--points", sphere.n_points, "Surface points")->capture_default_str();
    cmd->callback([&] {
      action = [&] {
        const VideoDims dims = g.dims();
        const MouseRecording rec = read_mouse_recording(rec_path, dims.frames);
        sphere.center = center.empty() ? Eigen::Vector2d(0.5 * dims.width, 0.5 * dims.height) : parse_point(center, "--center");
        sphere.seed = g.seed;
        const TrackSet tracks = sphere_tracks(mouse_to_rotations(rec, sphere), sphere, dims);
        write_tracks(out_path, tracks);
        std::printf("wrote %lld tracks x %lld frames\n", static_cast<long long>(tracks.n_tracks()),
                    static_cast<long long>(tracks.n_frames()));
      };
    });
  }

  // expand-camera -----------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("expand-camera", "Reproject a depth map along a camera path");
    static std::string out_path, depth_path, rec_path, anchor, path_kind = "orbit", path_out;
    static double angle = 30.0;
    static int frames = 0, stride = 2, max_tracks = 1024;
    cmd->add_option("--path", path_kind, "orbit, arc or mouse")->capture_default_str();
    cmd->add_option("--angle", angle, "Total sweep angle in degrees")->capture_default_str();
    cmd->add_option("--frames", frames, "Frame count (default: from --dims)");
    cmd->add_option("--depth", depth_path, "Depth PFM with a .json intrinsics sidecar (default: built-in test scene)");
    cmd->add_option("--recording", rec_path, "Mouse recording for --path mouse");
    cmd->add_option("--anchor", anchor, "Pivot / anchor pixel u,v (default: image centre)");
    cmd->add_option("--sample-stride", stride, "Unproject every n-th pixel")->capture_default_str();
    cmd->add_option("--max-tracks", max_tracks, "Random subset size, 0 keeps all")->capture_default_str();
    cmd->add_option("--out", out_path, "Output track file")->required();
    cmd->add_option("--path-out", path_out, "Also write the camera path JSON");
    cmd->callback([&] {
      action = [&] {
        const VideoDims dims = g.dims();
        const int t = frames > 0 ? frames : dims.frames;
        const DepthScene scene = depth_path.empty() ? synthetic_depth_scene(dims.width, dims.height) : read_depth_scene(depth_path);
        CameraPromptSpec spec;
        spec.path = parse_camera_path_kind(path_kind);
        spec.angle_degrees = angle;
        spec.sample_stride = stride;
        spec.max_tracks = max_tracks;
        spec.seed = g.seed;
        if (!anchor.empty()) spec.anchor = parse_point(anchor, "--anchor");
        std::optional<MouseRecording> rec;
        if (spec.path == CameraPathKind::mouse) {
          if (rec_path.empty()) throw ParseError("--path mouse needs --recording", "--recording");
          rec = read_mouse_recording(rec_path, t);
        }
        const TrackSet tracks = expand_camera(scene, spec, t, rec ? &*rec : nullptr);
        write_tracks(out_path, tracks);
        if (!path_out.empty()) {
          const Eigen::Vector2d a = spec.anchor.value_or(Eigen::Vector2d(0.5 * (scene.width() - 1), 0.5 * (scene.height() - 1)));
          CameraPath path;
          if (rec) {
            path = mouse_to_camera_path(*rec, scene, a);
          } else {
            SweepSpec sweep;
            sweep.pivot = unproject_pixel<double>(scene.intrinsics, a.x(), a.y(), scene.depth(quantize(a.y()), quantize(a.x())));
            sweep.total_angle = angle * std::numbers::pi / 180.0;
            sweep.frames = t;
            path = spec.path == CameraPathKind::orbit ? make_orbit_path(sweep) : make_arc_path(sweep);
          }
          write_camera_path(path_out, path);
        }
        std::printf("wrote %lld tracks x %lld frames\n", static_cast<long long>(tracks.n_tracks()),
                    static_cast<long long>(tracks.n_frames()));
      };
    });
  }

  // compose -----------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("compose", "Add object motion on top of camera motion");
    static std::string camera_path, out_path;
    static std::vector<std::string> objects, regions;
    cmd->add_option("--camera", camera_path, "Camera track file")->required();
    cmd->add_option("--object", objects, "Object track file (repeatable)")->required();
    cmd->add_option("--region", regions, "Region x0,y0,x1,y1 per object")->required();
    cmd->add_option("--out", out_path, "Output track file")->required();
    cmd->callback([&] {
      action = [&] {
        if (objects.size() != regions.size())
          throw ParseError("need one --region per --object", "--region");
        const TrackSet camera = read_tracks(camera_path);
        std::vector<ObjectLayer> layers;
        for (std::size_t i = 0; i < objects.size(); ++i)
          layers.push_back({read_tracks(objects[i]), parse_rect(regions[i], "--region")});
        write_tracks(out_path, compose(camera, layers));
      };
    });
  }

  // transfer ----------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("transfer", "Retarget tracks from a source video onto the target frame");
    static std::string source_path, out_path;
    static long long k = 0;
    cmd->add_option("--source", source_path, "Source track file")->required();
    cmd->add_option("--k", k, "Tracks to keep (default: all)");
    cmd->add_option("--out", out_path, "Output track file")->required();
    cmd->callback([&] {
      action = [&] {
        const VideoDims dims = g.dims();
        const TrackSet source = read_tracks(source_path);
        const Index keep = k > 0 ? static_cast<Index>(k) : source.n_tracks();
        write_tracks(out_path, transfer_retarget(source, dims.width, dims.height, keep, g.seed));
      };
    });
  }

  // magnify -----------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("magnify", "Scale (and optionally smooth) track displacements");
    static std::string in_path, out_path;
    static MagnifyParams params;
    cmd->add_option("--tracks", in_path, "Input track file")->required();
    cmd->add_option("--alpha", params.alpha, "Displacement gain")->capture_default_str();
    cmd->add_option("--sigma-space", params.sigma_space, "Spatial smoothing sigma (pixels)")->capture_default_str();
    cmd->add_option("--sigma-time", params.sigma_time, "Temporal smoothing sigma (frames)")->capture_default_str();
    cmd->add_option("--out", out_path, "Output track file")->required();
    cmd->callback([&] {
      action = [&] { write_tracks(out_path, magnify(read_tracks(in_path), params)); };
    });
  }

  // render ------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("render", "Warp the first frame along tracks into a video directory");
    static std::string frame_path, tracks_path, out_dir;
    static double fps = 16.0;
    cmd->add_option("--first-frame", frame_path, "First frame PNG")->required();
    cmd->add_option("--tracks", tracks_path, "Track file")->required();
    cmd->add_option("--out", out_dir, "Output video directory")->required();
    cmd->add_option("--fps", fps, "Frame rate written to metadata")->capture_default_str();
    cmd->callback([&] {
      action = [&] {
        const RgbImage first = read_png(frame_path);
        const TrackSet tracks = read_tracks(tracks_path);
        write_video(out_dir, render_warp(first, tracks, {static_cast<int>(tracks.n_frames()), first.width, first.height}, fps));
      };
    });
  }

  // overlay -----------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("overlay", "Draw tracks as trails over the first frame");
    static std::string frame_path, tracks_path, out_path;
    cmd->add_option("--first-frame", frame_path, "First frame PNG")->required();
    cmd->add_option("--tracks", tracks_path, "Track file")->required();
    cmd->add_option("--out", out_path, "Output PNG")->required();
    cmd->callback([&] {
      action = [&] { write_png(out_path, render_overlay(read_png(frame_path), read_tracks(tracks_path))); };
    });
  }

  // track -------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("track", "Track points through a video with the NCC tracker");
    static std::string video_dir, queries_path, out_path;
    static int grid = 0;
    static NccTrackerParams params;
    cmd->add_option("--video", video_dir, "Video directory")->required();
    cmd->add_option("--queries", queries_path, "Track file whose frame-0 positions are the queries");
    cmd->add_option("--grid", grid, "Query every n-th pixel instead of --queries");
    cmd->add_option("--patch", params.patch, "Template side (odd)")->capture_default_str();
    cmd->add_option("--search", params.search, "Search radius")->capture_default_str();
    cmd->add_option("--threshold", params.threshold, "NCC below this marks occlusion")->capture_default_str();
    cmd->add_option("--out", out_path, "Output track file")->required();
    cmd->callback([&] {
      action = [&] {
        const Video video = read_video(video_dir);
        std::vector<Eigen::Vector2d> queries;
        if (!queries_path.empty()) {
          queries = start_points(read_tracks(queries_path));
        } else if (grid > 0) {
          for (int y = grid / 2; y < video.height(); y += grid)
            for (int x = grid / 2; x < video.width(); x += grid) queries.emplace_back(x, y);
        } else {
          throw ParseError("give --queries or --grid", "--queries");
        }
        const NccTrackResult result = track_ncc(video, queries, params);
        write_tracks(out_path, result.tracks);
        std::printf("tracked %zu points (%d queries clamped inward)\n", queries.size(), result.clamped_queries);
      };
    });
  }

  // eval --------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("eval", "EPE between track files, optionally PSNR/SSIM between videos");
    static std::string gt_path, est_path, gt_video, est_video;
    cmd->add_option("--gt", gt_path, "Conditioning / ground-truth tracks")->required();
    cmd->add_option("--est", est_path, "Estimated tracks")->required();
    cmd->add_option("--gt-video", gt_video, "Reference video directory");
    cmd->add_option("--est-video", est_video, "Generated video directory");
    cmd->callback([&] {
      action = [&] {
        std::printf("EPE %.6f\n", epe(read_tracks(gt_path), read_tracks(est_path)));
        if (!gt_video.empty() || !est_video.empty()) {
          if (gt_video.empty() || est_video.empty()) throw ParseError("give both --gt-video and --est-video", "--gt-video");
          const Video a = read_video(gt_video), b = read_video(est_video);
          std::printf("PSNR %.6f\nSSIM %.6f\n", psnr(b, a), ssim(b, a));
        }
      };
    });
  }

  // bench -------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("bench", "Density sweep on synthetic scenes: generate, re-track, score");
    static std::string densities_text, json_out, generator = "warp", scene_dims = "16x96x96";
    static int stride = 2, scenes = 5;
    cmd->add_option("--densities", densities_text, "Comma-separated track counts (default 1,4,16,64,512,2048)");
    cmd->add_option("--scene-dims", scene_dims, "Synthetic scene extent FRAMESxWIDTHxHEIGHT")->capture_default_str();
    cmd->add_option("--scenes", scenes, "Number of synthetic scenes (1-5)")->capture_default_str();
    cmd->add_option("--track-stride", stride, "Ground-truth track grid spacing")->capture_default_str();
    cmd->add_option("--generator", generator, "warp or ground-truth")->capture_default_str();
    cmd->add_option("--json", json_out, "Also write the machine-readable report");
    cmd->callback([&] {
      action = [&] {
        BenchmarkOptions options;
        options.seed = g.seed;
        if (!densities_text.empty()) {
          options.densities.clear();
          for (double d : parse_numbers(densities_text, ',', 0, "--densities")) {
            if (d < 1 || d != static_cast<int>(d)) throw ParseError("densities must be positive integers", "--densities");
            options.densities.push_back(static_cast<int>(d));
          }
        }
        if (scenes < 1 || scenes > 5) throw RangeError("--scenes must lie in [1, 5]", "--scenes");
        VideoGenerator gen;
        if (generator == "warp") {
          gen = warp_generator();
        } else if (generator == "ground-truth") {
          gen = ground_truth_generator();
        } else {
          throw ParseError("unknown generator '" + generator + "'", "--generator");
        }
        std::vector<BenchmarkItem> dataset;
        const auto all = standard_scenes(parse_dims(scene_dims, "--scene-dims"));
        for (int i = 0; i < scenes; ++i) dataset.push_back(all[i].item(stride, "scene" + std::to_string(i)));
        const BenchmarkReport report = run_benchmark(dataset, gen, options);
        std::cout << report.to_text();
        if (!json_out.empty()) write_text_or_stdout(json_out, report.to_json());
      };
    });
  }

  // scene -------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("scene", "Write a synthetic test scene (frame, video, tracks, depth)");
    static std::string out_dir;
    static int index = 0, stride = 4;
    cmd->add_option("--out", out_dir, "Output directory")->required();
    cmd->add_option("--index", index, "Scene index (0-4)")->capture_default_str();
    cmd->add_option("--track-stride", stride, "Ground-truth track grid spacing")->capture_default_str();
    cmd->callback([&] {
      action = [&] {
        if (index < 0 || index > 4) throw RangeError("--index must lie in [0, 4]", "--index");
        const VideoDims dims = g.dims();
        const LayeredScene scene = standard_scenes(dims)[static_cast<std::size_t>(index)];
        fs::create_directories(out_dir);
        const Video video = scene.render();
        write_png(fs::path(out_dir) / "first_frame.png", video.frames.front());
        write_video(fs::path(out_dir) / "video", video);
        write_tracks(fs::path(out_dir) / "tracks.mptk", scene.tracks(stride));
        write_depth_scene(fs::path(out_dir) / "depth.pfm", synthetic_depth_scene(dims.width, dims.height));
      };
    });
  }

  // serve -------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("serve", "Run the HTTP service for the browser companion");
    static ServerOptions options;
    static std::string store = "mprompt_store";
    cmd->add_option("--host", options.host, "Bind address")->capture_default_str();
    cmd->add_option("--port", options.port, "Port, 0 picks a free one")->capture_default_str();
    cmd->add_option("--store", store, "Session store directory")->capture_default_str();
    cmd->add_option("--cors-origin", options.cors_origin, "Allowed UI origin")->capture_default_str();
    cmd->callback([&] {
      action = [&] {
        options.store = store;
        HttpService service(options);
        const int port = service.bind();
        std::printf("listening on http://%s:%d\n", options.host.c_str(), port);
        std::fflush(stdout);
        service.run();
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    action();
  } catch (const Error& e) {
    std::fprintf(stderr, "mprompt: %s: %s\n", error_kind(e), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mprompt: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
