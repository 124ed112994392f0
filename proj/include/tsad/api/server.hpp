#pragma once

#include "tsad/store/store.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace tsad {

struct ApiConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path store_path;
  std::optional<std::filesystem::path> static_dir;  // served under /ui/
  std::optional<std::string> auth_token;            // Authorization: Bearer <token>
  std::size_t max_points = 50'000;                  // per /signals/{id}/data response
  // Semi-supervised retraining.
  std::size_t window_size = 3;
  std::size_t step = 1;
  std::int64_t seed = 0;
};

/// JSON-over-HTTP front end to the knowledge base and the detection engine.
/// The store is opened once, in the constructor, and every write goes
/// through it. Requests that change an event also append the matching
/// EventInteraction in the same store batch.
///
/// Errors are answered as {"error": code, "message": text, "field": name?}.
class ApiServer {
 public:
  /// Throws Locked, CorruptJournal or Io when the store cannot be opened.
  explicit ApiServer(ApiConfig config);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Bind the listening socket and return the port. Throws BindError.
  int bind();
  /// Serve on the calling thread until stop(). Binds first if needed.
  void run();
  /// bind() and serve on a background thread.
  int start();
  void stop();

  int port() const noexcept;
  Store& store() noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tsad
