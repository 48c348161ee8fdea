#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mycloth/cloth_edit/render.hpp"
#include "mycloth/common/error.hpp"
#include "mycloth/design/catalog.hpp"
#include "mycloth/paint/asset_store.hpp"
#include "mycloth/paint/remote.hpp"
#include "mycloth/service/avatars.hpp"
#include "mycloth/service/render_cache.hpp"
#include "mycloth/service/session_store.hpp"
#include "mycloth/service/worker_pool.hpp"
#include "mycloth/tryon/predictor.hpp"

namespace mycloth::service {

// No try-on model loaded, or the inference queue cannot take the request.
class UnavailableError : public Error {
 public:
  using Error::Error;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  // patterns/, avatars/, assets/ and sessions/ live under the data dir.
  std::filesystem::path data_dir = "data";
  // "identity", "oracle" or a checkpoint directory; unset disables try-on.
  std::optional<std::string> checkpoint;
  int workers = 1;
  int max_queue = 8;
  int cache_size = 64;
  int paint_width = 256;
  int paint_height = 256;
  double edge_threshold = cloth_edit::kDefaultEdgeThreshold;
  paint::GeneratorClientConfig paint;

  void validate() const;
};

nlohmann::json to_json(const ServiceConfig& config);

// Reads a JSON config file with optional sections:
//   {"service": {...}, "cloth_edit": {"edge_threshold": 48}, "paint": {...}}
// Unknown keys are rejected with ConfigError. Sections other than these
// (for example "model" and "train") are ignored here.
ServiceConfig load_service_config(const std::filesystem::path& path);
void apply_service_section(ServiceConfig& config, const nlohmann::json& root);

struct PaintResult {
  std::string asset_id;
  std::string refined_prompt;
};

// The workflow behind the HTTP API, usable without a socket. All methods
// are safe to call concurrently.
class Studio {
 public:
  // Seeds an empty data dir with the bundled patterns and avatars.
  explicit Studio(ServiceConfig config, std::shared_ptr<paint::HttpTransport> transport = nullptr);
  // Uses the given predictor instead of config.checkpoint.
  Studio(ServiceConfig config, std::shared_ptr<const tryon::Predictor> predictor,
         std::shared_ptr<paint::HttpTransport> transport = nullptr);

  const design::Catalog& catalog() const { return catalog_; }
  const AvatarGallery& avatars() const { return avatars_; }
  const paint::AssetStore& assets() const { return assets_; }
  SessionStore& sessions() { return sessions_; }
  const ServiceConfig& config() const { return config_; }
  bool has_model() const { return predictor_ != nullptr; }
  std::string model_id() const { return predictor_ ? predictor_->id() : ""; }
  RenderCache& render_cache() { return cache_; }

  SessionRecord create_session(const std::string& pattern_id);
  SessionRecord get_session(const std::string& session_id) const;
  PaintResult generate_paint(const std::string& session_id, const std::string& prompt);
  // ValidationError for an empty update; RevisionConflictError when the
  // stored revision differs from expected_revision.
  SessionRecord update_design(const std::string& session_id, long long expected_revision,
                              const design::DesignUpdate& update);
  std::shared_ptr<const RenderedImage> render(const std::string& session_id);
  // PNG of y_p.
  std::vector<std::uint8_t> try_on(const std::string& session_id, const std::string& avatar_id);
  // The sample try_on feeds to the model.
  tryon::TryOnSample tryon_sample(const SessionRecord& record, const AvatarSpec& avatar);

 private:
  void init();

  ServiceConfig config_;
  design::Catalog catalog_;
  AvatarGallery avatars_;
  paint::AssetStore assets_;
  SessionStore sessions_;
  paint::PaintBackends backends_;
  std::shared_ptr<const tryon::Predictor> predictor_;
  RenderCache cache_;
  std::unique_ptr<WorkerPool> pool_;
};

// Parses a PATCH body. Collects every field problem into one
// ValidationError (fields keyed by JSON path).
struct DesignPatch {
  long long expected_revision = 0;
  design::DesignUpdate update;
};
DesignPatch parse_design_patch(const nlohmann::json& body);

}  // namespace mycloth::service
