#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"
#include "mycloth/design/image_io.hpp"
#include "mycloth/paint/asset_store.hpp"
#include "mycloth/paint/paint.hpp"
#include "mycloth/paint/remote.hpp"
#include "support/temp_dir.hpp"

using namespace mycloth;
using namespace mycloth::paint;
using nlohmann::json;

namespace {

struct Call {
  std::string url;
  json body;
  std::map<std::string, std::string> headers;
};

// Scripted transport: returns the queued responses in order, repeating the
// last one.
class FakeTransport final : public HttpTransport {
 public:
  explicit FakeTransport(std::vector<HttpResponse> responses) : responses_(std::move(responses)) {}
  HttpResponse post_json(const std::string& url, const std::string& body,
                         const std::map<std::string, std::string>& headers, double) const override {
    std::lock_guard lock(mutex_);
    calls.push_back({url, json::parse(body), headers});
    const std::size_t i = std::min(calls.size() - 1, responses_.size() - 1);
    return responses_[i];
  }
  mutable std::vector<Call> calls;

 private:
  std::vector<HttpResponse> responses_;
  mutable std::mutex mutex_;
};

GeneratorClientConfig remote_config(int retries) {
  GeneratorClientConfig c;
  c.backend = BackendKind::kRemote;
  c.retries = retries;
  c.timeout_seconds = 5;
  c.auth_token_env = "MYCLOTH_TEST_TOKEN";
  return c;
}

// Captures everything spdlog prints while alive.
class LogCapture {
 public:
  LogCapture() : previous_(spdlog::default_logger()) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(out_);
    spdlog::set_default_logger(std::make_shared<spdlog::logger>("capture", sink));
    spdlog::set_level(spdlog::level::trace);
  }
  ~LogCapture() { spdlog::set_default_logger(previous_); }
  std::string text() const { return out_.str(); }

 private:
  std::ostringstream out_;
  std::shared_ptr<spdlog::logger> previous_;
};

}  // namespace

TEST_CASE("mock refinement is the fixed template") {
  MockPromptRefiner refiner;
  CHECK(refine_prompt("dragon", refiner) == std::string("t-shirt print design, dragon, ") + kMockStyleSuffix);
  CHECK(refine_prompt("  dragon \n", refiner) == refine_prompt("dragon", refiner));
  CHECK(refine_prompt("dragon", refiner) == refine_prompt("dragon", refiner));
}

TEST_CASE("empty prompts are rejected") {
  MockPromptRefiner refiner;
  CHECK_THROWS_AS(refine_prompt("", refiner), ValidationError);
  CHECK_THROWS_AS(refine_prompt(" \t\n", refiner), ValidationError);
}

TEST_CASE("mock paint: size, alpha and determinism") {
  MockPromptRefiner refiner;
  MockTextToImage t2i;
  const std::string refined = refine_prompt("X", refiner);
  const PaintAsset a = generate_paint("X", refined, t2i, 256, 256);
  CHECK(a.image.width() == 256);
  CHECK(a.image.height() == 256);
  CHECK(a.image.channels() == 4);
  CHECK(a.refined_prompt == refined);
  CHECK(a.raw_prompt == "X");
  CHECK(a.generator_name == t2i.name());
  const PaintAsset b = generate_paint("X", refine_prompt("X", refiner), t2i, 256, 256);
  CHECK(a.image == b.image);
  const PaintAsset wide = generate_paint("X", refined, t2i, 300, 100);
  CHECK(wide.image.width() == 300);
  CHECK(wide.image.height() == 100);
}

TEST_CASE("different prompts give different images") {
  MockPromptRefiner refiner;
  MockTextToImage t2i;
  const PaintAsset x = generate_paint("X", refine_prompt("X", refiner), t2i, 128, 128);
  const PaintAsset y = generate_paint("Y", refine_prompt("Y", refiner), t2i, 128, 128);
  CHECK(sha256_hex(x.image.bytes()) != sha256_hex(y.image.bytes()));
}

TEST_CASE("paint size bounds") {
  MockTextToImage t2i;
  CHECK_THROWS_AS(generate_paint("X", "X refined", t2i, 32, 32), ValidationError);
  CHECK_THROWS_AS(generate_paint("X", "X refined", t2i, 64, 4096), ValidationError);
  CHECK_THROWS_AS(generate_paint("X", "   ", t2i, 64, 64), ValidationError);
  CHECK_NOTHROW(generate_paint("X", "X refined", t2i, 64, 2048));
}

TEST_CASE("asset store round trip") {
  testing::TempDir dir;
  AssetStore store(dir / "assets");
  MockTextToImage t2i;
  const PaintAsset asset = generate_paint("cat", "t-shirt print design, cat", t2i, 64, 64);
  const std::string id = store_asset(asset, store);
  const PaintAsset back = store.load(id);
  CHECK(back.asset_id == id);
  CHECK(back.raw_prompt == asset.raw_prompt);
  CHECK(back.refined_prompt == asset.refined_prompt);
  CHECK(back.generator_name == asset.generator_name);
  CHECK(back.created_at == asset.created_at);
  CHECK(back.image == asset.image);
  CHECK(std::filesystem::exists(dir / ("assets/" + id + ".png")));
  CHECK(std::filesystem::exists(dir / ("assets/" + id + ".json")));
}

TEST_CASE("asset store: unknown id and duplicate stores") {
  testing::TempDir dir;
  AssetStore store(dir / "assets");
  CHECK_THROWS_AS(store.load("0123456789abcdef"), NotFoundError);
  CHECK_THROWS_AS(store.load("../etc/passwd"), NotFoundError);
  MockTextToImage t2i;
  const PaintAsset asset = generate_paint("cat", "t-shirt print design, cat", t2i, 64, 64);
  const std::string a = store.store(asset), b = store.store(asset);
  CHECK(a != b);
  CHECK(design::read_file_bytes(store.image_path(a)) == design::read_file_bytes(store.image_path(b)));
}

TEST_CASE("asset store on an unwritable location") {
  CHECK_THROWS_AS(AssetStore("/proc/mycloth-assets"), StorageError);
}

TEST_CASE("client config validation") {
  GeneratorClientConfig c;
  c.timeout_seconds = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.timeout_seconds = 1;
  c.retries = 6;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.retries = -1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.retries = 5;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("client config JSON round trip") {
  GeneratorClientConfig c = remote_config(3);
  c.chat_model = "m";
  const GeneratorClientConfig back = generator_config_from_json(to_json(c));
  CHECK(back.backend == c.backend);
  CHECK(back.chat_model == "m");
  CHECK(back.retries == 3);
  CHECK(back.auth_token_env == c.auth_token_env);
  CHECK(back.timeout_seconds == c.timeout_seconds);
}

TEST_CASE("retry count: exactly 1 + retries attempts against a failing transport") {
  for (int retries = 0; retries <= 5; ++retries) {
    auto transport = std::make_shared<FakeTransport>(std::vector<HttpResponse>{{0, "", "connection refused"}});
    RemoteChatRefiner refiner(remote_config(retries), transport);
    try {
      refiner.refine(kRefinementInstruction, "dragon");
      FAIL("expected BackendUnavailableError");
    } catch (const BackendUnavailableError& e) {
      CHECK(e.cause() == "connection refused");
    }
    CHECK(transport->calls.size() == static_cast<std::size_t>(retries + 1));
  }
}

TEST_CASE("HTTP errors are retried and the first success wins") {
  auto transport = std::make_shared<FakeTransport>(std::vector<HttpResponse>{
      {500, "", ""}, {200, R"({"choices":[{"message":{"content":"a red dragon"}}]})", ""}});
  RemoteChatRefiner refiner(remote_config(2), transport);
  CHECK(refine_prompt("dragon", refiner) == "a red dragon");
  REQUIRE(transport->calls.size() == 2);
  const json& req = transport->calls[0].body;
  CHECK(req["model"] == remote_config(2).chat_model);
  CHECK(req["messages"][0]["content"] == kRefinementInstruction);
  CHECK(req["messages"][1]["content"] == "dragon");
}

TEST_CASE("malformed chat response is a backend failure") {
  auto transport = std::make_shared<FakeTransport>(std::vector<HttpResponse>{{200, R"({"choices":[]})", ""}});
  RemoteChatRefiner refiner(remote_config(0), transport);
  CHECK_THROWS_AS(refiner.refine("i", "t"), BackendUnavailableError);
}

TEST_CASE("remote text-to-image decodes base64 PNG and adds opaque alpha") {
  design::Raster rgb(64, 64, 3, 77);
  const std::string b64 = base64_encode(design::encode_png(rgb));
  auto transport = std::make_shared<FakeTransport>(std::vector<HttpResponse>{{200, json{{"image", b64}}.dump(), ""}});
  RemoteTextToImage t2i(remote_config(0), transport);
  const PaintAsset asset = generate_paint("x", "refined x", t2i, 64, 64);
  REQUIRE(asset.image.channels() == 4);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) REQUIRE(asset.image.at(x, y, 3) == 255);
  const json& req = transport->calls.at(0).body;
  CHECK(req["prompt"] == "refined x");
  CHECK(req["width"] == 64);
  CHECK(req["height"] == 64);
  CHECK(req["seed"].get<std::uint64_t>() == stable_hash64("refined x"));
}

TEST_CASE("remote image of another size is resampled to the request") {
  const std::string b64 = base64_encode(design::encode_png(design::Raster(32, 32, 3, 1)));
  auto transport = std::make_shared<FakeTransport>(std::vector<HttpResponse>{{200, json{{"image", b64}}.dump(), ""}});
  RemoteTextToImage t2i(remote_config(0), transport);
  const PaintAsset asset = generate_paint("x", "refined x", t2i, 64, 64);
  CHECK(asset.image.width() == 64);
  CHECK(asset.image.height() == 64);
  CHECK(asset.image.channels() == 4);
}

TEST_CASE("no secret leakage in serialized config, requests or logs") {
  const std::string secret = "sk-test-" + random_hex(12);
  ::setenv("MYCLOTH_TEST_TOKEN", secret.c_str(), 1);
  LogCapture logs;
  const GeneratorClientConfig c = remote_config(2);
  const std::string serialized = to_json(c).dump();
  CHECK(serialized.find("MYCLOTH_TEST_TOKEN") != std::string::npos);
  CHECK(serialized.find(secret) == std::string::npos);

  auto transport = std::make_shared<FakeTransport>(std::vector<HttpResponse>{{0, "", "timeout"}});
  RemoteChatRefiner refiner(c, transport);
  std::string error_text;
  try {
    refiner.refine("i", "t");
  } catch (const BackendUnavailableError& e) {
    error_text = e.what();
  }
  // The token travels only in the Authorization header.
  REQUIRE_FALSE(transport->calls.empty());
  CHECK(transport->calls[0].headers.at("Authorization") == "Bearer " + secret);
  CHECK(transport->calls[0].body.dump().find(secret) == std::string::npos);
  spdlog::default_logger()->flush();
  CHECK(logs.text().find("MYCLOTH_TEST_TOKEN") != std::string::npos);
  CHECK(logs.text().find(secret) == std::string::npos);
  CHECK(error_text.find(secret) == std::string::npos);
  ::unsetenv("MYCLOTH_TEST_TOKEN");
}

TEST_CASE("make_backends honours the backend kind") {
  GeneratorClientConfig mock;
  PaintBackends b = make_backends(mock);
  CHECK(b.refiner->name() == "mock-refiner");
  CHECK(b.t2i->name() == "mock-diffusion");
  auto transport = std::make_shared<FakeTransport>(std::vector<HttpResponse>{{0, "", "down"}});
  PaintBackends r = make_backends(remote_config(0), transport);
  CHECK(r.t2i->name() == "remote-diffusion");
  CHECK(parse_backend("mock") == BackendKind::kMock);
  CHECK(parse_backend("remote") == BackendKind::kRemote);
  CHECK_THROWS_AS(parse_backend("other"), ValidationError);
}

TEST_CASE("overall timeout bounds the retry loop") {
  // Each attempt burns the remaining budget; later attempts see none left.
  class SlowTransport final : public HttpTransport {
   public:
    HttpResponse post_json(const std::string&, const std::string&, const std::map<std::string, std::string>&,
                           double timeout) const override {
      ++calls;
      std::this_thread::sleep_for(std::chrono::duration<double>(timeout));
      return {0, "", "timeout"};
    }
    mutable std::atomic<int> calls{0};
  };
  GeneratorClientConfig c = remote_config(5);
  c.timeout_seconds = 0.2;
  SlowTransport transport;
  const auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(post_with_retries(transport, c, "http://x/", json::object(), "slow"), BackendUnavailableError);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(elapsed < c.timeout_seconds + 1.0);
  CHECK(transport.calls.load() >= 1);
}
