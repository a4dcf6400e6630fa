#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "mirstat/service.hpp"

namespace mirstat {

/// HTTP/1.1 front end for a Service. Requests are handled on a thread pool;
/// an optional directory is served as static files under "/".
class HttpServer {
 public:
  explicit HttpServer(const Service& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds without accepting yet. Port 0 picks a free port. Returns the bound
  /// port; throws Error(io) when the address is unavailable.
  int bind(const std::string& host, int port);

  /// Accepts connections until stop() is called.
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mirstat
