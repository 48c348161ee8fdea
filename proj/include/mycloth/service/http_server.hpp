#pragma once

#include <memory>
#include <string>

#include "mycloth/service/studio.hpp"

namespace httplib {
class Server;
}

namespace mycloth::service {

// HTTP front end of a Studio:
//   GET   /api/health
//   GET   /api/patterns                     GET /api/patterns/{id}/thumbnail
//   POST  /api/sessions                     GET /api/sessions/{id}
//   POST  /api/sessions/{id}/paint          GET /api/assets/{id}.png
//   PATCH /api/sessions/{id}/design         GET /api/sessions/{id}/render
//   GET   /api/avatars                      GET /api/avatars/{id}/image
//   POST  /api/sessions/{id}/tryon
// Errors are JSON {"error": message, "fields"?: {...}, "current_revision"?: n}.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<Studio> studio);
  ~HttpServer();

  // Binds host:port (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen_after_bind();
  void stop();

 private:
  std::shared_ptr<Studio> studio_;
  std::unique_ptr<httplib::Server> server_;
};

// HTTP status for an exception thrown by Studio.
int status_for(const std::exception& error);

}  // namespace mycloth::service
