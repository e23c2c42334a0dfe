#include "vine/server.hpp"

#include <httplib.h>

#include "vine/errors.hpp"

namespace vine {
namespace {

// rejections the session logged; anything else never reached it
bool logged_rejection(const std::string& r) {
  for (const char* c : {reason::kSectionJammed, reason::kJointsBent, reason::kLengthOutOfRange,
                        reason::kSectionNotExposed, reason::kTendonOutOfRange, reason::kInvalidValue,
                        reason::kMixedTendonModes, reason::kNumericError})
    if (r == c) return true;
  return false;
}

}  // namespace

SessionServer::SessionServer(Scenario scenario, std::string static_dir)
    : session_(std::move(scenario)), static_dir_(std::move(static_dir)), http_(std::make_unique<httplib::Server>()) {
  install_routes();
}

SessionServer::~SessionServer() = default;

Json SessionServer::handshake() const { return handshake_message(); }

Json SessionServer::state() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return state_message(session_);
}

std::string SessionServer::log() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return save_log(session_);
}

Json SessionServer::handle(const std::string& body) {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::size_t index = session_.log().size();
  Command cmd;
  try {
    const LineMap lines(body);
    const Json msg = parse_json_text(body);
    if (!msg.is_object()) throw ParseError("", 1, "message must be an object");
    for (const auto& [k, v] : msg.items())
      if (k != "type" && k != "protocol_version" && k != "command")
        throw ParseError(k, lines.line_of("/" + k), "unknown field");
    if (msg.value("type", "") != "command") throw ParseError("type", lines.line_of("/type"), "expected a command message");
    if (msg.contains("protocol_version") && msg.at("protocol_version") != kProtocolVersion)
      return error_message("protocol_version", "server speaks protocol " + std::to_string(kProtocolVersion), index);
    if (!msg.contains("command")) throw ParseError("command", 1, "missing");
    cmd = command_from_json(msg.at("command"), UnitSystem::Interface, &lines, "/command");
  } catch (const Error& e) {
    return error_message(e.code(), e.what(), index);
  }
  const EventRecord rec = session_.execute(cmd);
  if (!rec.accepted) return error_message(rec.reason, rec.detail, rec.index);
  return state_message(session_);
}

void SessionServer::install_routes() {
  auto reply = [](httplib::Response& res, const Json& j) { res.set_content(j.dump(), "application/json"); };
  http_->Get("/api/handshake", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, handshake()); });
  http_->Get("/api/state", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, state()); });
  http_->Get("/api/log", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(log(), "application/x-ndjson");
  });
  http_->Post("/api/command", [this, reply](const httplib::Request& req, httplib::Response& res) {
    const Json out = handle(req.body);
    if (out.at("type") == "error") res.status = logged_rejection(out.at("reason")) ? 409 : 400;
    reply(res, out);
  });
  if (!static_dir_.empty() && !http_->set_mount_point("/", static_dir_))
    throw DomainError("static_dir", "not a directory: " + static_dir_);
}

bool SessionServer::listen(const std::string& host, int port) { return http_->listen(host, port); }

int SessionServer::bind_any_port(const std::string& host) { return http_->bind_to_any_port(host); }

bool SessionServer::listen_after_bind() { return http_->listen_after_bind(); }

void SessionServer::stop() { http_->stop(); }

}  // namespace vine
