#pragma once

// Serialized forms of tracks, depth scenes, camera paths, videos, mouse
// recordings and conditioning volumes. Every reader validates the invariants
// of the type it produces and throws ParseError (with field and, for binary
// formats, byte offset) on violation.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mprompt/camera.hpp"
#include "mprompt/image.hpp"
#include "mprompt/recording.hpp"
#include "mprompt/track_core.hpp"

namespace mprompt {

using Bytes = std::vector<std::uint8_t>;

// --- Track file: "MPTK", u32 version=1, u32 n_tracks, u32 n_frames, u32 width,
// u32 height, then n_tracks*n_frames records {f32 x, f32 y, u8 visible},
// track-major, little-endian, unpadded.
inline constexpr std::size_t kTrackHeaderBytes = 24;
inline constexpr std::size_t kTrackRecordBytes = 9;

Bytes encode_tracks(const TrackSet& tracks);
TrackSet decode_tracks(std::span<const std::uint8_t> bytes);
void write_tracks(const std::filesystem::path& path, const TrackSet& tracks);
TrackSet read_tracks(const std::filesystem::path& path);

// --- Depth scene: grayscale PFM ("Pf") raster of metres plus a JSON sidecar
// {"fx","fy","cx","cy"}. PFM rows are stored bottom-to-top; a negative scale
// marks little-endian samples.
Bytes encode_pfm(const DepthScene& scene);
// Raw PFM decode; depth validity is checked by decode_depth_scene.
DepthScene decode_pfm(std::span<const std::uint8_t> bytes);
std::string encode_intrinsics(const PinholeIntrinsics& k);
PinholeIntrinsics decode_intrinsics(const std::string& text);
DepthScene decode_depth_scene(std::span<const std::uint8_t> pfm, const std::string& intrinsics_json);
void write_depth_scene(const std::filesystem::path& pfm_path, const DepthScene& scene);
DepthScene read_depth_scene(const std::filesystem::path& pfm_path);
// Sidecar location for a PFM path: same stem, ".json" extension.
std::filesystem::path intrinsics_path_for(const std::filesystem::path& pfm_path);

// --- Camera path: {"poses": [{"rotation": [9 row-major], "translation": [3]}]}
std::string encode_camera_path(const CameraPath& path);
CameraPath decode_camera_path(const std::string& text);
void write_camera_path(const std::filesystem::path& file, const CameraPath& path);
CameraPath read_camera_path(const std::filesystem::path& file);

// --- Video: directory of frame_%05d.png plus metadata.json
// {"fps","n_frames","width","height"}.
std::string frame_filename(int index);
std::string encode_video_metadata(const Video& video);
void write_video(const std::filesystem::path& dir, const Video& video);
Video read_video(const std::filesystem::path& dir);

// --- Mouse recording: {"fps": 16, "samples": [{"x","y","pressed"}]}.
std::string encode_mouse_recording(const MouseRecording& rec);
MouseRecording decode_mouse_recording(const std::string& text, std::optional<int> expected_frames = std::nullopt);
void write_mouse_recording(const std::filesystem::path& file, const MouseRecording& rec);
MouseRecording read_mouse_recording(const std::filesystem::path& file, std::optional<int> expected_frames = std::nullopt);

// --- Conditioning volume: "MPCV", then u32 version=1, frames, height, width,
// channels, n_tracks, max_index (eight header fields, 32 bytes), then
// frames*height*width*channels f32 values in [t][y][x][c] order.
inline constexpr std::size_t kVolumeHeaderBytes = 32;

struct VolumeFile {
  ConditioningVolume volume;
  std::uint32_t n_tracks = 0;
  std::uint32_t max_index = 0;
};

Bytes encode_volume(const ConditioningVolume& volume, std::uint32_t n_tracks, std::uint32_t max_index);
VolumeFile decode_volume(std::span<const std::uint8_t> bytes);

}  // namespace mprompt
