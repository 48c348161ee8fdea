#include "mycloth/paint/remote.hpp"

#include <chrono>
#include <cstdlib>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"
#include "mycloth/design/image_io.hpp"

namespace mycloth::paint {

using nlohmann::json;

void GeneratorClientConfig::validate() const {
  if (!(timeout_seconds > 0)) {
    throw ValidationError("invalid generator config", {{"timeout_seconds", "must be > 0"}});
  }
  if (retries < 0 || retries > 5) {
    throw ValidationError("invalid generator config", {{"retries", "must be in [0, 5]"}});
  }
}

BackendKind parse_backend(const std::string& text) {
  if (text == "mock") return BackendKind::kMock;
  if (text == "remote" || text == "remote-chat+remote-diffusion") return BackendKind::kRemote;
  throw ValidationError("unknown paint backend '" + text + "'", {{"backend", "must be mock or remote"}});
}

json to_json(const GeneratorClientConfig& c) {
  return {{"backend", c.backend == BackendKind::kMock ? "mock" : "remote"},
          {"chat_endpoint", c.chat_endpoint},
          {"chat_model", c.chat_model},
          {"t2i_endpoint", c.t2i_endpoint},
          {"auth_token_env", c.auth_token_env},
          {"timeout_seconds", c.timeout_seconds},
          {"retries", c.retries}};
}

GeneratorClientConfig generator_config_from_json(const json& j) {
  GeneratorClientConfig c;
  if (j.contains("backend")) c.backend = parse_backend(j.at("backend").get<std::string>());
  c.chat_endpoint = j.value("chat_endpoint", c.chat_endpoint);
  c.chat_model = j.value("chat_model", c.chat_model);
  c.t2i_endpoint = j.value("t2i_endpoint", c.t2i_endpoint);
  c.auth_token_env = j.value("auth_token_env", c.auth_token_env);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  c.retries = j.value("retries", c.retries);
  c.validate();
  return c;
}

namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post_json(const std::string& url, const std::string& body,
                         const std::map<std::string, std::string>& headers,
                         double timeout_seconds) const override {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) return {0, "", "malformed URL"};
    auto path_start = url.find('/', scheme_end + 3);
    std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    httplib::Client client(origin);
    auto seconds = static_cast<time_t>(timeout_seconds);
    auto micros = static_cast<time_t>((timeout_seconds - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto result = client.Post(path, h, body, "application/json");
    if (!result) return {0, "", httplib::to_string(result.error())};
    return {result->status, result->body, ""};
  }
};

std::map<std::string, std::string> auth_headers(const GeneratorClientConfig& config) {
  std::map<std::string, std::string> headers;
  if (const char* token = std::getenv(config.auth_token_env.c_str()); token != nullptr && *token != '\0') {
    headers["Authorization"] = std::string("Bearer ") + token;
  }
  return headers;
}

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

json post_with_retries(const HttpTransport& transport, const GeneratorClientConfig& config,
                       const std::string& url, const json& body, const std::string& backend_name) {
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::duration<double>(config.timeout_seconds);
  const std::string payload = body.dump();
  const auto headers = auth_headers(config);
  std::string cause = "no attempt made";
  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    double remaining = std::chrono::duration<double>(deadline - clock::now()).count();
    if (remaining <= 0) {
      cause = "deadline of " + std::to_string(config.timeout_seconds) + "s exceeded";
      break;
    }
    HttpResponse response = transport.post_json(url, payload, headers, remaining);
    if (!response.error.empty()) {
      cause = response.error;
    } else if (response.status < 200 || response.status >= 300) {
      cause = "HTTP " + std::to_string(response.status);
    } else {
      try {
        return json::parse(response.body);
      } catch (const json::exception& e) {
        cause = std::string("malformed JSON response: ") + e.what();
      }
    }
    spdlog::warn("{} attempt {}/{} failed: {} (token env: {})", backend_name, attempt + 1,
                 config.retries + 1, cause, config.auth_token_env);
  }
  throw BackendUnavailableError(backend_name + " unavailable", cause);
}

RemoteChatRefiner::RemoteChatRefiner(GeneratorClientConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
}

std::string RemoteChatRefiner::refine(const std::string& instruction, const std::string& theme) const {
  json request = {{"model", config_.chat_model},
                  {"messages", json::array({{{"role", "system"}, {"content", instruction}},
                                            {{"role", "user"}, {"content", theme}}})}};
  json response = post_with_retries(*transport_, config_, config_.chat_endpoint, request, name());
  try {
    return response.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendUnavailableError(name() + " unavailable", std::string("unexpected response shape: ") + e.what());
  }
}

RemoteTextToImage::RemoteTextToImage(GeneratorClientConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
}

Raster RemoteTextToImage::generate(const std::string& prompt, int width, int height, std::uint64_t seed) const {
  json request = {{"prompt", prompt}, {"width", width}, {"height", height}, {"seed", seed}};
  json response = post_with_retries(*transport_, config_, config_.t2i_endpoint, request, name());
  std::string encoded;
  if (response.contains("image")) {
    encoded = response["image"].get<std::string>();
  } else if (response.contains("data") && !response["data"].empty()) {
    encoded = response["data"][0].value("b64_json", "");
  }
  if (encoded.empty()) {
    throw BackendUnavailableError(name() + " unavailable", "response carries no base64 image");
  }
  try {
    return design::decode_png(base64_decode(encoded));
  } catch (const Error& e) {
    throw BackendUnavailableError(name() + " unavailable", std::string("undecodable image: ") + e.what());
  }
}

PaintBackends make_backends(const GeneratorClientConfig& config, std::shared_ptr<HttpTransport> transport) {
  config.validate();
  if (config.backend == BackendKind::kMock) {
    return {std::make_shared<MockPromptRefiner>(), std::make_shared<MockTextToImage>()};
  }
  if (!transport) transport = make_http_transport();
  return {std::make_shared<RemoteChatRefiner>(config, transport),
          std::make_shared<RemoteTextToImage>(config, transport)};
}

}  // namespace mycloth::paint
