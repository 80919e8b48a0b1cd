#include "mprompt/io_formats.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include <json.hpp>

#include "mprompt/errors.hpp"

namespace mprompt {

using nlohmann::json;

namespace {

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(Bytes& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

float get_f32(std::span<const std::uint8_t> b, std::size_t at) { return std::bit_cast<float>(get_u32(b, at)); }

std::uint32_t checked_u32(Index v, const char* field) {
  if (v < 0 || v > static_cast<Index>(UINT32_MAX)) throw RangeError("value does not fit in u32", field);
  return static_cast<std::uint32_t>(v);
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed ") + what + " JSON: " + e.what(), what);
  }
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError("missing field", path.empty() ? key : path + "." + key);
  return obj.at(key);
}

double require_number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  const std::string field = path.empty() ? key : path + "." + key;
  if (!v.is_number()) throw ParseError("expected a number", field);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError("non-finite value", field);
  return d;
}

int require_count(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  const std::string field = path.empty() ? key : path + "." + key;
  if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > INT32_MAX)
    throw ParseError("expected a non-negative integer", field);
  return v.get<int>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Tracks

Bytes encode_tracks(const TrackSet& tracks) {
  tracks.validate();
  Bytes out;
  const auto n = static_cast<std::size_t>(tracks.n_tracks());
  const auto t = static_cast<std::size_t>(tracks.n_frames());
  out.reserve(kTrackHeaderBytes + kTrackRecordBytes * n * t);
  out.insert(out.end(), {'M', 'P', 'T', 'K'});
  put_u32(out, 1);
  put_u32(out, checked_u32(tracks.n_tracks(), "n_tracks"));
  put_u32(out, checked_u32(tracks.n_frames(), "n_frames"));
  put_u32(out, checked_u32(tracks.width, "width"));
  put_u32(out, checked_u32(tracks.height, "height"));
  for (Index i = 0; i < tracks.n_tracks(); ++i) {
    for (Index f = 0; f < tracks.n_frames(); ++f) {
      put_f32(out, static_cast<float>(tracks.x(i, f)));
      put_f32(out, static_cast<float>(tracks.y(i, f)));
      out.push_back(tracks.visible(i, f));
    }
  }
  return out;
}

TrackSet decode_tracks(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kTrackHeaderBytes)
    throw ParseError("track file shorter than its header", "header", static_cast<std::int64_t>(bytes.size()));
  if (std::memcmp(bytes.data(), "MPTK", 4) != 0) throw ParseError("bad magic, expected MPTK", "magic", 0);
  if (get_u32(bytes, 4) != 1) throw ParseError("unsupported track file version", "version", 4);
  const std::uint64_t n = get_u32(bytes, 8);
  const std::uint64_t t = get_u32(bytes, 12);
  const std::uint32_t width = get_u32(bytes, 16);
  const std::uint32_t height = get_u32(bytes, 20);
  if (width > INT32_MAX) throw ParseError("width out of range", "width", 16);
  if (height > INT32_MAX) throw ParseError("height out of range", "height", 20);
  const std::uint64_t expected = kTrackHeaderBytes + kTrackRecordBytes * n * t;
  if (bytes.size() != expected) {
    throw ParseError("length mismatch: header implies " + std::to_string(expected) + " bytes, got " +
                         std::to_string(bytes.size()),
                     "records", static_cast<std::int64_t>(std::min<std::uint64_t>(bytes.size(), expected)));
  }
  TrackSet tracks(static_cast<Index>(n), static_cast<Index>(t), static_cast<int>(width), static_cast<int>(height));
  std::size_t at = kTrackHeaderBytes;
  for (Index i = 0; i < tracks.n_tracks(); ++i) {
    for (Index f = 0; f < tracks.n_frames(); ++f, at += kTrackRecordBytes) {
      const float x = get_f32(bytes, at);
      const float y = get_f32(bytes, at + 4);
      const std::uint8_t v = bytes[at + 8];
      if (!std::isfinite(x)) throw ParseError("non-finite x", "x", static_cast<std::int64_t>(at));
      if (!std::isfinite(y)) throw ParseError("non-finite y", "y", static_cast<std::int64_t>(at + 4));
      if (v > 1) throw ParseError("visibility must be 0 or 1", "visible", static_cast<std::int64_t>(at + 8));
      tracks.x(i, f) = x;
      tracks.y(i, f) = y;
      tracks.visible(i, f) = v;
    }
  }
  return tracks;
}

void write_tracks(const std::filesystem::path& path, const TrackSet& tracks) {
  write_file_bytes(path, encode_tracks(tracks));
}

TrackSet read_tracks(const std::filesystem::path& path) { return decode_tracks(read_file_bytes(path)); }

// ---------------------------------------------------------------------------
// Depth scene

Bytes encode_pfm(const DepthScene& scene) {
  const std::string header = "Pf\n" + std::to_string(scene.width()) + " " + std::to_string(scene.height()) + "\n-1.0\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + 4 * static_cast<std::size_t>(scene.width()) * scene.height());
  for (int y = scene.height() - 1; y >= 0; --y)
    for (int x = 0; x < scene.width(); ++x) put_f32(out, scene.depth(y, x));
  return out;
}

DepthScene decode_pfm(std::span<const std::uint8_t> bytes) {
  // Header: three whitespace-terminated tokens after the "Pf" line.
  std::size_t pos = 0;
  auto next_token = [&](const char* field) {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) ++pos;
    if (start == pos || pos >= bytes.size()) throw ParseError("truncated PFM header", field, static_cast<std::int64_t>(start));
    return std::string(bytes.begin() + start, bytes.begin() + pos);
  };
  const std::string magic = next_token("magic");
  if (magic != "Pf") {
    throw ParseError(magic == "PF" ? "colour PFM not supported, expected grayscale Pf" : "bad PFM magic", "magic", 0);
  }
  int width = 0;
  int height = 0;
  double scale = 0.0;
  try {
    width = std::stoi(next_token("width"));
    height = std::stoi(next_token("height"));
    scale = std::stod(next_token("scale"));
  } catch (const std::logic_error&) {
    throw ParseError("malformed PFM header number", "header", static_cast<std::int64_t>(pos));
  }
  ++pos;  // single whitespace byte ends the header
  if (width <= 0 || height <= 0) throw ParseError("PFM dimensions must be positive", "width", 0);
  if (scale == 0.0 || !std::isfinite(scale)) throw ParseError("PFM scale must be non-zero", "scale", 0);
  const bool little = scale < 0;
  const std::size_t need = pos + 4 * static_cast<std::size_t>(width) * height;
  if (bytes.size() != need) {
    throw ParseError("PFM length mismatch: expected " + std::to_string(need) + " bytes, got " +
                         std::to_string(bytes.size()),
                     "samples", static_cast<std::int64_t>(std::min(bytes.size(), need)));
  }
  DepthScene scene;
  scene.depth.resize(height, width);
  std::size_t at = pos;
  for (int y = height - 1; y >= 0; --y) {
    for (int x = 0; x < width; ++x, at += 4) {
      std::uint32_t raw = get_u32(bytes, at);
      if (!little) raw = __builtin_bswap32(raw);
      scene.depth(y, x) = std::bit_cast<float>(raw);
    }
  }
  return scene;
}

std::string encode_intrinsics(const PinholeIntrinsics& k) {
  json j = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
  return j.dump(2) + "\n";
}

PinholeIntrinsics decode_intrinsics(const std::string& text) {
  const json j = parse_json(text, "intrinsics");
  PinholeIntrinsics k{require_number(j, "fx", ""), require_number(j, "fy", ""), require_number(j, "cx", ""),
                      require_number(j, "cy", "")};
  if (k.fx <= 0) throw ParseError("focal length must be positive", "fx");
  if (k.fy <= 0) throw ParseError("focal length must be positive", "fy");
  return k;
}

DepthScene decode_depth_scene(std::span<const std::uint8_t> pfm, const std::string& intrinsics_json) {
  DepthScene scene = decode_pfm(pfm);
  scene.intrinsics = decode_intrinsics(intrinsics_json);
  for (int y = 0; y < scene.height(); ++y) {
    for (int x = 0; x < scene.width(); ++x) {
      const float d = scene.depth(y, x);
      if (!std::isfinite(d) || d <= 0.0f) {
        throw ParseError("depth must be finite and positive at pixel (" + std::to_string(x) + ", " +
                             std::to_string(y) + ")",
                         "depth");
      }
    }
  }
  return scene;
}

std::filesystem::path intrinsics_path_for(const std::filesystem::path& pfm_path) {
  auto p = pfm_path;
  p.replace_extension(".json");
  return p;
}

void write_depth_scene(const std::filesystem::path& pfm_path, const DepthScene& scene) {
  write_file_bytes(pfm_path, encode_pfm(scene));
  write_file_text(intrinsics_path_for(pfm_path), encode_intrinsics(scene.intrinsics));
}

DepthScene read_depth_scene(const std::filesystem::path& pfm_path) {
  return decode_depth_scene(read_file_bytes(pfm_path), read_file_text(intrinsics_path_for(pfm_path)));
}

// ---------------------------------------------------------------------------
// Camera path

std::string encode_camera_path(const CameraPath& path) {
  json poses = json::array();
  for (const Pose& pose : path) {
    json r = json::array();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.push_back(pose.rotation(i, j));
    poses.push_back({{"rotation", r},
                     {"translation", {pose.translation.x(), pose.translation.y(), pose.translation.z()}}});
  }
  return json{{"poses", poses}}.dump(2) + "\n";
}

CameraPath decode_camera_path(const std::string& text) {
  const json j = parse_json(text, "camera_path");
  const json& poses = require(j, "poses", "");
  if (!poses.is_array()) throw ParseError("expected an array", "poses");
  CameraPath path;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const std::string base = "poses[" + std::to_string(i) + "]";
    const json& r = require(poses[i], "rotation", base);
    const json& t = require(poses[i], "translation", base);
    if (!r.is_array() || r.size() != 9) throw ParseError("rotation needs 9 numbers", base + ".rotation");
    if (!t.is_array() || t.size() != 3) throw ParseError("translation needs 3 numbers", base + ".translation");
    Pose pose;
    for (int k = 0; k < 9; ++k) {
      if (!r[k].is_number()) throw ParseError("expected a number", base + ".rotation");
      pose.rotation(k / 3, k % 3) = r[k].get<double>();
    }
    for (int k = 0; k < 3; ++k) {
      if (!t[k].is_number()) throw ParseError("expected a number", base + ".translation");
      pose.translation(k) = t[k].get<double>();
    }
    if (!pose.rotation.allFinite() || !pose.translation.allFinite())
      throw ParseError("non-finite pose value", base);
    if (!is_rotation(pose.rotation, 1e-6))
      throw ParseError("rotation is not orthonormal with determinant +1", base + ".rotation");
    path.push_back(pose);
  }
  return path;
}

void write_camera_path(const std::filesystem::path& file, const CameraPath& path) {
  write_file_text(file, encode_camera_path(path));
}

CameraPath read_camera_path(const std::filesystem::path& file) { return decode_camera_path(read_file_text(file)); }

// ---------------------------------------------------------------------------
// Video

std::string frame_filename(int index) {
  char name[32];
  std::snprintf(name, sizeof name, "frame_%05d.png", index);
  return name;
}

std::string encode_video_metadata(const Video& video) {
  json meta = {{"fps", video.fps}, {"n_frames", video.n_frames()}, {"width", video.width()}, {"height", video.height()}};
  return meta.dump(2) + "\n";
}

void write_video(const std::filesystem::path& dir, const Video& video) {
  std::filesystem::create_directories(dir);
  for (int i = 0; i < video.n_frames(); ++i) {
    const RgbImage& f = video.frames[i];
    if (f.width != video.width() || f.height != video.height())
      throw ShapeError("frame " + std::to_string(i) + " differs in size", "frames");
    write_png(dir / frame_filename(i), f);
  }
  write_file_text(dir / "metadata.json", encode_video_metadata(video));
}

Video read_video(const std::filesystem::path& dir) {
  const json meta = parse_json(read_file_text(dir / "metadata.json"), "metadata");
  Video video;
  video.fps = require_number(meta, "fps", "");
  if (video.fps <= 0) throw ParseError("fps must be positive", "fps");
  const int n = require_count(meta, "n_frames", "");
  const int width = require_count(meta, "width", "");
  const int height = require_count(meta, "height", "");
  for (int i = 0; i < n; ++i) {
    const auto file = dir / frame_filename(i);
    if (!std::filesystem::exists(file)) throw ParseError("missing frame file " + file.filename().string(), "n_frames");
    RgbImage frame = read_png(file);
    if (frame.width != width || frame.height != height)
      throw ParseError(file.filename().string() + " does not match metadata dimensions", "width");
    video.frames.push_back(std::move(frame));
  }
  if (std::filesystem::exists(dir / frame_filename(n)))
    throw ParseError("more frame files than metadata n_frames", "n_frames");
  return video;
}

// ---------------------------------------------------------------------------
// Mouse recording

std::string encode_mouse_recording(const MouseRecording& rec) {
  json samples = json::array();
  for (const MouseSample& s : rec.samples) samples.push_back({{"x", s.x}, {"y", s.y}, {"pressed", s.pressed}});
  return json{{"fps", rec.fps}, {"samples", samples}}.dump(2) + "\n";
}

namespace {

MouseRecording mouse_from_json(const json& j, std::optional<int> expected_frames) {
  MouseRecording rec;
  rec.fps = require_number(j, "fps", "");
  if (rec.fps <= 0) throw ParseError("fps must be positive", "fps");
  const json& samples = require(j, "samples", "");
  if (!samples.is_array()) throw ParseError("expected an array", "samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string base = "samples[" + std::to_string(i) + "]";
    const json& p = require(samples[i], "pressed", base);
    if (!p.is_boolean() && !p.is_number_integer()) throw ParseError("expected a boolean", base + ".pressed");
    rec.samples.push_back({require_number(samples[i], "x", base), require_number(samples[i], "y", base),
                           p.is_boolean() ? p.get<bool>() : p.get<int>() != 0});
  }
  if (expected_frames && rec.n_frames() != *expected_frames) {
    throw ParseError("recording has " + std::to_string(rec.n_frames()) + " samples, expected " +
                         std::to_string(*expected_frames),
                     "samples");
  }
  return rec;
}

}  // namespace

MouseRecording decode_mouse_recording(const std::string& text, std::optional<int> expected_frames) {
  return mouse_from_json(parse_json(text, "recording"), expected_frames);
}

void write_mouse_recording(const std::filesystem::path& file, const MouseRecording& rec) {
  write_file_text(file, encode_mouse_recording(rec));
}

MouseRecording read_mouse_recording(const std::filesystem::path& file, std::optional<int> expected_frames) {
  return decode_mouse_recording(read_file_text(file), expected_frames);
}

// ---------------------------------------------------------------------------
// Conditioning volume

Bytes encode_volume(const ConditioningVolume& volume, std::uint32_t n_tracks, std::uint32_t max_index) {
  Bytes out;
  out.reserve(kVolumeHeaderBytes + 4 * volume.values.size());
  out.insert(out.end(), {'M', 'P', 'C', 'V'});
  put_u32(out, 1);
  put_u32(out, checked_u32(volume.frames, "frames"));
  put_u32(out, checked_u32(volume.height, "height"));
  put_u32(out, checked_u32(volume.width, "width"));
  put_u32(out, checked_u32(volume.channels, "channels"));
  put_u32(out, n_tracks);
  put_u32(out, max_index);
  for (float v : volume.values) put_f32(out, v);
  return out;
}

VolumeFile decode_volume(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kVolumeHeaderBytes)
    throw ParseError("volume file shorter than its header", "header", static_cast<std::int64_t>(bytes.size()));
  if (std::memcmp(bytes.data(), "MPCV", 4) != 0) throw ParseError("bad magic, expected MPCV", "magic", 0);
  if (get_u32(bytes, 4) != 1) throw ParseError("unsupported volume version", "version", 4);
  const std::uint64_t f = get_u32(bytes, 8), h = get_u32(bytes, 12), w = get_u32(bytes, 16), c = get_u32(bytes, 20);
  const std::uint64_t expected = kVolumeHeaderBytes + 4 * f * h * w * c;
  if (bytes.size() != expected)
    throw ParseError("volume length mismatch", "values", static_cast<std::int64_t>(std::min<std::uint64_t>(bytes.size(), expected)));
  VolumeFile file;
  file.volume = ConditioningVolume(static_cast<int>(f), static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
  file.n_tracks = get_u32(bytes, 24);
  file.max_index = get_u32(bytes, 28);
  for (std::size_t i = 0; i < file.volume.values.size(); ++i) {
    const std::size_t at = kVolumeHeaderBytes + 4 * i;
    const float v = get_f32(bytes, at);
    if (!std::isfinite(v)) throw ParseError("non-finite volume value", "values", static_cast<std::int64_t>(at));
    file.volume.values[i] = v;
  }
  return file;
}

}  // namespace mprompt
