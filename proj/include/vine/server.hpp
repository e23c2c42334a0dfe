#pragma once

// HTTP transport for the session protocol. One writer: commands are applied
// in arrival order under a mutex; reads see a consistent snapshot.

#include <memory>
#include <mutex>
#include <string>

#include "vine/scenario_io.hpp"
#include "vine/session.hpp"

namespace httplib {
class Server;
}

namespace vine {

class SessionServer {
 public:
  explicit SessionServer(Scenario scenario, std::string static_dir = "");
  ~SessionServer();

  // Protocol core, usable without a socket.
  Json handshake() const;
  Json state() const;
  // Body of a `command` message -> `state` on success, `error` otherwise.
  Json handle(const std::string& body);
  std::string log() const;

  // Blocks until stop(). Returns false if the port could not be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it; serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();

 private:
  void install_routes();

  mutable std::mutex mutex_;
  Session session_;
  std::string static_dir_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace vine
