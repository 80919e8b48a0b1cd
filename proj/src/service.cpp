#include "mprompt/service.hpp"

#include "mprompt/archive.hpp"
#include "mprompt/errors.hpp"
#include "mprompt/io_formats.hpp"
#include "mprompt/prompt_camera.hpp"
#include "mprompt/prompt_compose.hpp"
#include "mprompt/prompt_mouse.hpp"
#include "mprompt/prompt_primitive.hpp"
#include "mprompt/synth_warp.hpp"

// After the Eigen-based headers: the socket headers define macros that
// collide with Eigen internals.
#include <openssl/evp.h>

#include <algorithm>
#include <fstream>

#include <httplib.h>
#include <json.hpp>

namespace mprompt {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

namespace {

// Unknown session or track id.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

bool is_hex_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

ApiResponse json_response(int status, const json& body) { return {status, "application/json", body.dump() + "\n"}; }

ApiResponse error_response(int status, const std::string& message, const std::string& field) {
  json body = {{"error", message}};
  if (!field.empty()) body["field"] = field;
  return json_response(status, body);
}

// Maps exceptions to status codes: malformed input is 400, unknown ids 404,
// well-formed requests that break an invariant 422.
template <typename F>
ApiResponse guarded(F&& f) {
  try {
    return f();
  } catch (const NotFoundError& e) {
    return error_response(404, e.what(), e.field());
  } catch (const ParseError& e) {
    return error_response(400, e.what(), e.field());
  } catch (const Error& e) {
    return error_response(422, e.what(), e.field());
  } catch (const json::exception& e) {
    return error_response(400, e.what(), "");
  } catch (const std::exception& e) {
    return error_response(500, e.what(), "");
  }
}

void write_atomic(const fs::path& path, const std::string& data) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string as_string(const Bytes& bytes) { return {bytes.begin(), bytes.end()}; }

std::span<const std::uint8_t> as_span(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

// Typed accessors for request bodies; failures name the offending field.
const json* find(const json& obj, const std::string& key) {
  if (!obj.is_object()) return nullptr;
  const auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double get_number(const json& obj, const std::string& key, const std::string& path, std::optional<double> fallback) {
  const json* v = find(obj, key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    throw ParseError("missing field", path + key);
  }
  if (!v->is_number()) throw ParseError("expected a number", path + key);
  return v->get<double>();
}

int get_int(const json& obj, const std::string& key, const std::string& path, std::optional<int> fallback) {
  const json* v = find(obj, key);
  if (v == nullptr) {
    if (fallback) return *fallback;
    throw ParseError("missing field", path + key);
  }
  if (!v->is_number_integer()) throw ParseError("expected an integer", path + key);
  return v->get<int>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& path) {
  const json* v = find(obj, key);
  if (v == nullptr) throw ParseError("missing field", path + key);
  if (!v->is_string()) throw ParseError("expected a string", path + key);
  return v->get<std::string>();
}

std::vector<double> get_numbers(const json& obj, const std::string& key, const std::string& path, std::size_t n) {
  const json* v = find(obj, key);
  if (v == nullptr) throw ParseError("missing field", path + key);
  if (!v->is_array() || v->size() != n) throw ParseError("expected an array of " + std::to_string(n) + " numbers", path + key);
  std::vector<double> out;
  for (const json& e : *v) {
    if (!e.is_number()) throw ParseError("expected a number", path + key);
    out.push_back(e.get<double>());
  }
  return out;
}

Rect get_rect(const json& obj, const std::string& key, const std::string& path) {
  const auto r = get_numbers(obj, key, path, 4);
  return {r[0], r[1], r[2], r[3]};
}

struct Session {
  RgbImage first_frame;
  std::optional<DepthScene> depth;
};

}  // namespace

ServiceCore::ServiceCore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "sessions");
  fs::create_directories(root_ / "tracks");
}

fs::path ServiceCore::session_dir(const std::string& session_id) const { return root_ / "sessions" / session_id; }

std::shared_ptr<std::mutex> ServiceCore::session_lock(const std::string& session_id) {
  std::lock_guard<std::mutex> guard(locks_guard_);
  auto& slot = locks_[session_id];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

namespace {

Session load_session(const fs::path& dir) {
  Session s;
  s.first_frame = read_png(dir / "first_frame.png");
  if (fs::exists(dir / "depth.pfm"))
    s.depth = decode_depth_scene(read_file_bytes(dir / "depth.pfm"), read_file_text(dir / "intrinsics.json"));
  return s;
}

void require_session(const fs::path& dir, const std::string& id) {
  if (!is_hex_id(id) || !fs::exists(dir / "first_frame.png")) throw NotFoundError("unknown session " + id, "session_id");
}

std::vector<std::string> read_lines(const fs::path& file) {
  std::vector<std::string> lines;
  std::ifstream in(file);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) lines.push_back(line);
  return lines;
}

}  // namespace

ApiResponse ServiceCore::create_session(const std::vector<UploadPart>& parts) {
  return guarded([&] {
    const UploadPart* frame = nullptr;
    const UploadPart* depth = nullptr;
    const UploadPart* intrinsics = nullptr;
    for (const UploadPart& p : parts) {
      if (p.name == "first_frame") frame = &p;
      if (p.name == "depth") depth = &p;
      if (p.name == "intrinsics") intrinsics = &p;
    }
    if (frame == nullptr) throw ParseError("missing upload", "first_frame");
    if ((depth == nullptr) != (intrinsics == nullptr))
      throw ParseError("depth and intrinsics must be uploaded together", depth ? "intrinsics" : "depth");
    const RgbImage image = decode_png(as_span(frame->content));
    if (depth != nullptr) {
      const DepthScene scene = decode_depth_scene(as_span(depth->content), intrinsics->content);
      if (scene.width() != image.width || scene.height() != image.height)
        throw ShapeError("depth map is " + std::to_string(scene.width()) + "x" + std::to_string(scene.height()) +
                             " but the first frame is " + std::to_string(image.width) + "x" + std::to_string(image.height),
                         "depth");
    }
    std::string key = std::to_string(frame->content.size()) + ":" + frame->content;
    if (depth != nullptr)
      key += std::to_string(depth->content.size()) + ":" + depth->content + std::to_string(intrinsics->content.size()) +
             ":" + intrinsics->content;
    const std::string id = sha256_hex(key).substr(0, 32);
    const fs::path dir = session_dir(id);
    {
      const auto lock = session_lock(id);
      std::lock_guard<std::mutex> guard(*lock);
      fs::create_directories(dir);
      if (!fs::exists(dir / "first_frame.png")) {
        if (depth != nullptr) {
          write_atomic(dir / "depth.pfm", depth->content);
          write_atomic(dir / "intrinsics.json", intrinsics->content);
        }
        write_atomic(dir / "first_frame.png", frame->content);
      }
    }
    return json_response(201, {{"session_id", id},
                               {"width", image.width},
                               {"height", image.height},
                               {"has_depth", depth != nullptr}});
  });
}

ApiResponse ServiceCore::session_state(const std::string& session_id) {
  return guarded([&] {
    const fs::path dir = session_dir(session_id);
    require_session(dir, session_id);
    const auto lock = session_lock(session_id);
    std::lock_guard<std::mutex> guard(*lock);
    const Session s = load_session(dir);
    json tracks = json::array();
    for (const std::string& line : read_lines(dir / "tracks.txt")) {
      const json meta = json::parse(read_file_text(root_ / "tracks" / (line + ".json")));
      tracks.push_back(meta);
    }
    return json_response(200, {{"session_id", session_id},
                               {"width", s.first_frame.width},
                               {"height", s.first_frame.height},
                               {"has_depth", s.depth.has_value()},
                               {"tracks", tracks}});
  });
}

namespace {

TrackSet load_track(const fs::path& root, const std::string& id, const std::string& field) {
  if (!is_hex_id(id) || !fs::exists(root / "tracks" / (id + ".mptk"))) throw NotFoundError("unknown track " + id, field);
  return read_tracks(root / "tracks" / (id + ".mptk"));
}

MouseRecording recording_from(const json& req, std::optional<int> frames) {
  const json* rec = find(req, "recording");
  if (rec == nullptr) throw ParseError("missing field", "recording");
  try {
    return decode_mouse_recording(rec->dump(), frames);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), "recording." + e.field());
  }
}

// Frame count for an expansion: params.frames if given, else the recording
// length, else the default clip length.
int frames_for(const json& params, const json& req) {
  if (find(params, "frames") != nullptr) return get_int(params, "frames", "params.", std::nullopt);
  if (const json* rec = find(req, "recording"); rec != nullptr && rec->is_object()) {
    if (const json* s = find(*rec, "samples"); s != nullptr && s->is_array()) return static_cast<int>(s->size());
  }
  return VideoDims{}.frames;
}

TrackSet run_expansion(const fs::path& root, const Session& session, const json& req, std::string& kind) {
  kind = get_string(req, "kind", "");
  static const json empty = json::object();
  const json* p = find(req, "params");
  if (p != nullptr && !p->is_object()) throw ParseError("expected an object", "params");
  const json& params = p != nullptr ? *p : empty;
  std::uint64_t seed = 0;
  if (const json* s = find(req, "seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0))
      throw ParseError("expected a non-negative integer", "seed");
    seed = s->get<std::uint64_t>();
  }
  const int width = session.first_frame.width, height = session.first_frame.height;

  if (kind == "mouse") {
    const int frames = frames_for(params, req);
    const MouseRecording rec = recording_from(req, frames);
    GridSpec spec;
    spec.grid_side = get_int(params, "grid_side", "params.", spec.grid_side);
    spec.stride = get_number(params, "stride", "params.", spec.stride);
    if (const json* v = find(params, "persist")) {
      if (!v->is_boolean()) throw ParseError("expected a boolean", "params.persist");
      spec.persist = v->get<bool>();
    }
    if (const json* pins = find(params, "pins")) {
      spec.static_pins = PinSpec{get_rect(*pins, "region", "params.pins."), get_int(*pins, "stride", "params.pins.", 16)};
    }
    return expand_drag_to_grid(rec, spec, {frames, width, height});
  }
  if (kind == "sphere") {
    const int frames = frames_for(params, req);
    const MouseRecording rec = recording_from(req, frames);
    SphereSpec sphere;
    if (find(params, "center") != nullptr) {
      const auto c = get_numbers(params, "center", "params.", 2);
      sphere.center = {c[0], c[1]};
    } else {
      sphere.center = {0.5 * width, 0.5 * height};
    }
    sphere.radius = get_number(params, "radius", "params.", 0.25 * std::min(width, height));
    sphere.n_points = get_int(params, "n_points", "params.", sphere.n_points);
    sphere.seed = seed;
    return sphere_tracks(mouse_to_rotations(rec, sphere), sphere, {frames, width, height});
  }
  if (kind == "camera") {
    if (!session.depth) throw InvariantError("camera prompts need a depth map in the session", "depth");
    CameraPromptSpec spec;
    spec.path = find(params, "path") ? parse_camera_path_kind(get_string(params, "path", "params.")) : CameraPathKind::orbit;
    spec.angle_degrees = get_number(params, "angle", "params.", spec.angle_degrees);
    spec.sample_stride = get_int(params, "sample_stride", "params.", spec.sample_stride);
    spec.max_tracks = get_int(params, "max_tracks", "params.", static_cast<int>(spec.max_tracks));
    if (find(params, "anchor") != nullptr) {
      const auto a = get_numbers(params, "anchor", "params.", 2);
      spec.anchor = Eigen::Vector2d(a[0], a[1]);
    }
    spec.seed = seed;
    const int frames = frames_for(params, req);
    std::optional<MouseRecording> rec;
    if (spec.path == CameraPathKind::mouse) rec = recording_from(req, frames);
    return expand_camera(*session.depth, spec, frames, rec ? &*rec : nullptr);
  }
  if (kind == "compose") {
    const TrackSet camera = load_track(root, get_string(params, "camera_track", "params."), "params.camera_track");
    const json* objects = find(params, "objects");
    if (objects == nullptr || !objects->is_array()) throw ParseError("expected an array", "params.objects");
    std::vector<ObjectLayer> layers;
    for (std::size_t i = 0; i < objects->size(); ++i) {
      const std::string base = "params.objects[" + std::to_string(i) + "].";
      const json& o = (*objects)[i];
      layers.push_back({load_track(root, get_string(o, "track", base), base + "track"), get_rect(o, "region", base)});
    }
    return compose(camera, layers);
  }
  if (kind == "transfer") {
    const TrackSet source = load_track(root, get_string(params, "source_track", "params."), "params.source_track");
    const int k = get_int(params, "k", "params.", static_cast<int>(source.n_tracks()));
    return transfer_retarget(source, width, height, k, seed);
  }
  if (kind == "magnify") {
    const TrackSet source = load_track(root, get_string(params, "source_track", "params."), "params.source_track");
    MagnifyParams mp;
    mp.alpha = get_number(params, "alpha", "params.", mp.alpha);
    mp.sigma_space = get_number(params, "sigma_space", "params.", mp.sigma_space);
    mp.sigma_time = get_number(params, "sigma_time", "params.", mp.sigma_time);
    return magnify(source, mp);
  }
  throw ParseError("unknown kind '" + kind + "' (expected mouse, sphere, camera, compose, transfer or magnify)", "kind");
}

}  // namespace

ApiResponse ServiceCore::expand(const std::string& session_id, const std::string& body) {
  return guarded([&] {
    const fs::path dir = session_dir(session_id);
    require_session(dir, session_id);
    json req;
    try {
      req = json::parse(body);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), "body", static_cast<std::int64_t>(e.byte));
    }
    if (!req.is_object()) throw ParseError("expected a JSON object", "body");

    const auto lock = session_lock(session_id);
    std::lock_guard<std::mutex> guard(*lock);
    const Session session = load_session(dir);
    std::string kind;
    const TrackSet tracks = run_expansion(root_, session, req, kind);
    tracks.validate();
    const std::string bytes = as_string(encode_tracks(tracks));
    const std::string checksum = sha256_hex(bytes);
    const std::string track_id = sha256_hex(session_id + ":" + checksum).substr(0, 32);

    const json meta = {{"track_id", track_id},
                       {"session_id", session_id},
                       {"kind", kind},
                       {"checksum", checksum},
                       {"n_tracks", tracks.n_tracks()},
                       {"n_frames", tracks.n_frames()},
                       {"visible_samples", static_cast<long long>((tracks.visible != 0).count())}};
    const fs::path track_file = root_ / "tracks" / (track_id + ".mptk");
    if (!fs::exists(track_file)) {
      write_atomic(root_ / "tracks" / (track_id + ".json"), meta.dump() + "\n");
      write_atomic(track_file, bytes);
    }
    const auto listed = read_lines(dir / "tracks.txt");
    if (std::find(listed.begin(), listed.end(), track_id) == listed.end()) {
      std::ofstream out(dir / "tracks.txt", std::ios::app);
      out << track_id << "\n";
    }
    return json_response(201, meta);
  });
}

namespace {

json track_meta(const fs::path& root, const std::string& track_id) {
  if (!is_hex_id(track_id) || !fs::exists(root / "tracks" / (track_id + ".json")))
    throw NotFoundError("unknown track " + track_id, "track_id");
  return json::parse(read_file_text(root / "tracks" / (track_id + ".json")));
}

}  // namespace

ApiResponse ServiceCore::track_overlay(const std::string& track_id) {
  return guarded([&] {
    json out = track_meta(root_, track_id);
    const TrackSet tracks = load_track(root_, track_id, "track_id");
    out["width"] = tracks.width;
    out["height"] = tracks.height;
    json rows = json::array();
    for (Index n = 0; n < tracks.n_tracks(); ++n) {
      json xs = json::array(), ys = json::array(), vis = json::array();
      for (Index t = 0; t < tracks.n_frames(); ++t) {
        xs.push_back(tracks.x(n, t));
        ys.push_back(tracks.y(n, t));
        vis.push_back(static_cast<int>(tracks.visible(n, t)));
      }
      rows.push_back({{"x", xs}, {"y", ys}, {"visible", vis}});
    }
    out["tracks"] = rows;
    return json_response(200, out);
  });
}

ApiResponse ServiceCore::preview(const std::string& track_id, const std::string& body) {
  return guarded([&] {
    const json meta = track_meta(root_, track_id);
    double fps = 16.0;
    if (!body.empty()) {
      json req;
      try {
        req = json::parse(body);
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), "body", static_cast<std::int64_t>(e.byte));
      }
      fps = get_number(req, "fps", "", fps);
      if (!(fps > 0)) throw RangeError("fps must be positive", "fps");
    }
    const std::string session_id = meta.at("session_id").get<std::string>();
    const fs::path dir = session_dir(session_id);
    require_session(dir, session_id);
    const TrackSet tracks = load_track(root_, track_id, "track_id");
    RgbImage first;
    {
      const auto lock = session_lock(session_id);
      std::lock_guard<std::mutex> guard(*lock);
      first = read_png(dir / "first_frame.png");
    }
    const Video video = render_warp(first, tracks, {static_cast<int>(tracks.n_frames()), first.width, first.height}, fps);
    ZipWriter zip;
    const std::string meta_text = encode_video_metadata(video);
    zip.add("metadata.json", Bytes(meta_text.begin(), meta_text.end()));
    for (int t = 0; t < video.n_frames(); ++t) zip.add(frame_filename(t), encode_png(video.frames[t]));
    return ApiResponse{200, "application/zip", as_string(zip.finish())};
  });
}

// ---------------------------------------------------------------------------

struct HttpService::Impl {
  ServerOptions options;
  ServiceCore core;
  httplib::Server server;
  int port = -1;

  explicit Impl(ServerOptions opts) : options(std::move(opts)), core(options.store) {}
};

namespace {

void reply(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  res.set_content(api.body, api.content_type);
}

}  // namespace

HttpService::HttpService(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  auto& server = impl_->server;
  ServiceCore& core = impl_->core;
  server.set_default_headers({{"Access-Control-Allow-Origin", impl_->options.cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/api/session", [&core](const httplib::Request& req, httplib::Response& res) {
    std::vector<UploadPart> parts;
    if (req.is_multipart_form_data()) {
      for (const auto& [name, file] : req.files) parts.push_back({name, file.content});
    } else if (req.get_header_value("Content-Type") == "image/png") {
      parts.push_back({"first_frame", req.body});
    } else {
      reply(res, error_response(400, "expected multipart/form-data or image/png", "first_frame"));
      return;
    }
    reply(res, core.create_session(parts));
  });
  server.Get(R"(/api/session/([^/]+))", [&core](const httplib::Request& req, httplib::Response& res) {
    reply(res, core.session_state(req.matches[1]));
  });
  server.Post(R"(/api/session/([^/]+)/expand)", [&core](const httplib::Request& req, httplib::Response& res) {
    reply(res, core.expand(req.matches[1], req.body));
  });
  server.Get(R"(/api/tracks/([^/]+))", [&core](const httplib::Request& req, httplib::Response& res) {
    reply(res, core.track_overlay(req.matches[1]));
  });
  server.Post(R"(/api/tracks/([^/]+)/preview)", [&core](const httplib::Request& req, httplib::Response& res) {
    reply(res, core.preview(req.matches[1], req.body));
  });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      const ApiResponse api = error_response(res.status, res.status == 404 ? "no such endpoint" : "request failed", "");
      res.set_content(api.body, api.content_type);
    }
  });
}

HttpService::~HttpService() { stop(); }

int HttpService::bind() {
  auto& s = *impl_;
  if (s.options.port == 0) {
    s.port = s.server.bind_to_any_port(s.options.host);
  } else if (s.server.bind_to_port(s.options.host, s.options.port)) {
    s.port = s.options.port;
  }
  if (s.port <= 0) throw std::runtime_error("cannot bind " + s.options.host + ":" + std::to_string(s.options.port));
  return s.port;
}

void HttpService::run() { impl_->server.listen_after_bind(); }

void HttpService::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace mprompt
