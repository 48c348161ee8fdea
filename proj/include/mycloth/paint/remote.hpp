#pragma once

#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "mycloth/paint/paint.hpp"

namespace mycloth::paint {

enum class BackendKind { kMock, kRemote };

struct GeneratorClientConfig {
  BackendKind backend = BackendKind::kMock;
  std::string chat_endpoint = "https://api.openai.com/v1/chat/completions";
  std::string chat_model = "gpt-3.5-turbo";
  std::string t2i_endpoint = "http://127.0.0.1:7860/generate";
  // Name of the environment variable holding the bearer token. The secret
  // itself is read at request time and never stored or serialized.
  std::string auth_token_env = "MYCLOTH_API_TOKEN";
  double timeout_seconds = 30.0;
  int retries = 2;

  void validate() const;  // timeout > 0, retries in [0, 5]
};

nlohmann::json to_json(const GeneratorClientConfig& config);
GeneratorClientConfig generator_config_from_json(const nlohmann::json& j);
BackendKind parse_backend(const std::string& text);

struct HttpResponse {
  int status = 0;
  std::string body;
  std::string error;  // transport-level failure (connection refused, timeout, ...)
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post_json(const std::string& url, const std::string& body,
                                 const std::map<std::string, std::string>& headers,
                                 double timeout_seconds) const = 0;
};

// cpp-httplib backed transport; supports http:// and https:// URLs.
std::shared_ptr<HttpTransport> make_http_transport();

// OpenAI-compatible chat completion: {model, messages} -> choices[0].message.content.
class RemoteChatRefiner final : public PromptRefiner {
 public:
  RemoteChatRefiner(GeneratorClientConfig config, std::shared_ptr<HttpTransport> transport);
  std::string name() const override { return "remote-chat:" + config_.chat_model; }
  std::string refine(const std::string& instruction, const std::string& theme) const override;

 private:
  GeneratorClientConfig config_;
  std::shared_ptr<HttpTransport> transport_;
};

// {prompt, width, height, seed} -> {"image": "<base64 PNG>"}.
class RemoteTextToImage final : public TextToImage {
 public:
  RemoteTextToImage(GeneratorClientConfig config, std::shared_ptr<HttpTransport> transport);
  std::string name() const override { return "remote-diffusion"; }
  Raster generate(const std::string& prompt, int width, int height, std::uint64_t seed) const override;

 private:
  GeneratorClientConfig config_;
  std::shared_ptr<HttpTransport> transport_;
};

// Posts with up to 1 + retries attempts inside an overall budget of
// timeout_seconds. Throws BackendUnavailableError carrying the last cause.
nlohmann::json post_with_retries(const HttpTransport& transport, const GeneratorClientConfig& config,
                                 const std::string& url, const nlohmann::json& body,
                                 const std::string& backend_name);

struct PaintBackends {
  std::shared_ptr<PromptRefiner> refiner;
  std::shared_ptr<TextToImage> t2i;
};

PaintBackends make_backends(const GeneratorClientConfig& config,
                            std::shared_ptr<HttpTransport> transport = nullptr);

}  // namespace mycloth::paint
