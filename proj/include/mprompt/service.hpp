#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace mprompt {

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct UploadPart {
  std::string name;
  std::string content;
};

// Request handling without any transport: every endpoint maps parsed inputs
// to an ApiResponse. Sessions and track artifacts live on disk under
// `root`, addressed by SHA-256 of their content.
//
//   <root>/sessions/<id>/first_frame.png   [depth.pfm, intrinsics.json]
//   <root>/tracks/<id>.mptk                 <id>.json (owning session)
class ServiceCore {
 public:
  explicit ServiceCore(std::filesystem::path root);

  ApiResponse create_session(const std::vector<UploadPart>& parts);
  ApiResponse session_state(const std::string& session_id);
  ApiResponse expand(const std::string& session_id, const std::string& body);
  ApiResponse track_overlay(const std::string& track_id);
  ApiResponse preview(const std::string& track_id, const std::string& body);

  const std::filesystem::path& root() const { return root_; }

 private:
  std::shared_ptr<std::mutex> session_lock(const std::string& session_id);
  std::filesystem::path session_dir(const std::string& session_id) const;

  std::filesystem::path root_;
  std::mutex locks_guard_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

std::string sha256_hex(const std::string& data);

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string cors_origin = "*";
  std::filesystem::path store = "mprompt_store";
};

// HTTP/1.1 front end over ServiceCore.
class HttpService {
 public:
  explicit HttpService(ServerOptions options);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Binds the socket and returns the bound port.
  int bind();
  // Serves until stop(); call bind() first.
  void run();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mprompt
