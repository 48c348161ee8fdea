#include "mycloth/service/http_server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "mycloth/design/image_io.hpp"

namespace mycloth::service {

using nlohmann::json;

int status_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const InvalidStateError*>(&e)) return 400;
  if (dynamic_cast<const NotFoundError*>(&e)) return 404;
  if (dynamic_cast<const RevisionConflictError*>(&e)) return 409;
  if (dynamic_cast<const GoneError*>(&e)) return 410;
  if (dynamic_cast<const BackendUnavailableError*>(&e)) return 502;
  if (dynamic_cast<const UnavailableError*>(&e)) return 503;
  return 500;
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_png(httplib::Response& res, const std::vector<std::uint8_t>& png) {
  res.status = 200;
  res.set_content(reinterpret_cast<const char*>(png.data()), png.size(), "image/png");
}

void send_error(httplib::Response& res, const std::exception& e) {
  const int status = status_for(e);
  json body = {{"error", e.what()}};
  if (auto* v = dynamic_cast<const ValidationError*>(&e); v && !v->fields().empty()) body["fields"] = v->fields();
  if (auto* s = dynamic_cast<const InvalidStateError*>(&e)) body["fields"] = {{"placement", s->what()}};
  if (auto* r = dynamic_cast<const RevisionConflictError*>(&e)) body["current_revision"] = r->current_revision();
  if (status >= 500) {
    spdlog::error("request failed ({}): {}", status, e.what());
  }
  send_json(res, status, body);
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON body", {{"body", e.what()}});
  }
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const std::exception& e) {
      send_error(res, e);
    }
  };
}

}  // namespace

HttpServer::HttpServer(std::shared_ptr<Studio> studio)
    : studio_(std::move(studio)), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  Studio& st = *studio_;

  s.Get("/api/health", guarded([&st](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"model", st.has_model() ? json(st.model_id()) : json(nullptr)}});
  }));

  s.Get("/api/patterns", guarded([&st](const httplib::Request&, httplib::Response& res) {
    json list = json::array();
    for (const auto& p : design::list_patterns(st.catalog())) {
      list.push_back({{"id", p.pattern_id},
                      {"name", p.display_name},
                      {"thumbnail_url", "/api/patterns/" + p.pattern_id + "/thumbnail"},
                      {"printable_region",
                       {{"x", p.printable_region.x},
                        {"y", p.printable_region.y},
                        {"w", p.printable_region.w},
                        {"h", p.printable_region.h}}}});
    }
    send_json(res, 200, list);
  }));

  s.Get(R"(/api/patterns/([^/]+)/thumbnail)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
    send_png(res, design::encode_png(st.catalog().find(req.matches[1]).base_image));
  }));

  s.Post("/api/sessions", guarded([&st](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.is_object() || !body.contains("pattern_id") || !body["pattern_id"].is_string()) {
      throw ValidationError("pattern_id is required", {{"pattern_id", "must be a string"}});
    }
    send_json(res, 201, to_json(st.create_session(body["pattern_id"].get<std::string>())));
  }));

  s.Get(R"(/api/sessions/([^/]+))", guarded([&st](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, to_json(st.get_session(req.matches[1])));
  }));

  s.Post(R"(/api/sessions/([^/]+)/paint)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.is_object() || !body.contains("prompt") || !body["prompt"].is_string()) {
      throw ValidationError("prompt is required", {{"prompt", "must be a string"}});
    }
    const PaintResult r = st.generate_paint(req.matches[1], body["prompt"].get<std::string>());
    send_json(res, 200,
              {{"asset_id", r.asset_id}, {"refined_prompt", r.refined_prompt}, {"image_url", "/api/assets/" + r.asset_id + ".png"}});
  }));

  s.Get(R"(/api/assets/([0-9a-f]+)\.png)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!st.assets().contains(id)) throw NotFoundError("unknown asset '" + id + "'");
    send_png(res, design::read_file_bytes(st.assets().image_path(id)));
  }));

  s.Patch(R"(/api/sessions/([^/]+)/design)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
    const DesignPatch patch = parse_design_patch(parse_body(req));
    send_json(res, 200, to_json(st.update_design(req.matches[1], patch.expected_revision, patch.update)));
  }));

  s.Get(R"(/api/sessions/([^/]+)/render)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
    const auto image = st.render(req.matches[1]);
    send_png(res, image->png);
  }));

  s.Get("/api/avatars", guarded([&st](const httplib::Request&, httplib::Response& res) {
    json list = json::array();
    for (const auto& a : st.avatars().avatars()) {
      list.push_back({{"avatar_id", a.avatar_id},
                      {"name", a.display_name},
                      {"width", a.width},
                      {"height", a.height},
                      {"image_url", "/api/avatars/" + a.avatar_id + "/image"}});
    }
    send_json(res, 200, list);
  }));

  s.Get(R"(/api/avatars/([^/]+)/image)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
    send_png(res, design::read_file_bytes(st.avatars().find(req.matches[1]).person_image));
  }));

  s.Post(R"(/api/sessions/([^/]+)/tryon)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.is_object() || !body.contains("avatar_id") || !body["avatar_id"].is_string()) {
      throw ValidationError("avatar_id is required", {{"avatar_id", "must be a string"}});
    }
    send_png(res, st.try_on(req.matches[1], body["avatar_id"].get<std::string>()));
  }));

  s.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw StorageError("cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) throw StorageError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen_after_bind() { server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

}  // namespace mycloth::service
