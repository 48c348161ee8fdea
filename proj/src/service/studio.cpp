#include "mycloth/service/studio.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

#include "mycloth/common/util.hpp"
#include "mycloth/design/image_io.hpp"
#include "mycloth/paint/paint.hpp"
#include "mycloth/tryon/checkpoint.hpp"
#include "mycloth/tryon/convert.hpp"

namespace mycloth::service {

namespace fs = std::filesystem;
using nlohmann::json;

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) throw ConfigError("service.port must be in [0, 65535]");
  if (workers < 1 || workers > 64) throw ConfigError("service.workers must be in [1, 64]");
  if (max_queue < 1) throw ConfigError("service.max_queue must be >= 1");
  if (cache_size < 0) throw ConfigError("service.cache_size must be >= 0");
  if (paint_width < paint::kMinPaintSide || paint_width > paint::kMaxPaintSide || paint_height < paint::kMinPaintSide ||
      paint_height > paint::kMaxPaintSide) {
    throw ConfigError("service.paint_width/paint_height must be in [64, 2048]");
  }
  if (!(edge_threshold >= 0)) throw ConfigError("cloth_edit.edge_threshold must be >= 0");
  paint.validate();
}

json to_json(const ServiceConfig& c) {
  return {{"service",
           {{"host", c.host},
            {"port", c.port},
            {"data_dir", c.data_dir.string()},
            {"checkpoint", c.checkpoint ? json(*c.checkpoint) : json(nullptr)},
            {"workers", c.workers},
            {"max_queue", c.max_queue},
            {"cache_size", c.cache_size},
            {"paint_width", c.paint_width},
            {"paint_height", c.paint_height}}},
          {"cloth_edit", {{"edge_threshold", c.edge_threshold}}},
          {"paint", paint::to_json(c.paint)}};
}

void apply_service_section(ServiceConfig& c, const json& root) {
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");
  try {
    if (root.contains("service")) {
      const json& s = root["service"];
      static const std::set<std::string> known = {"host",      "port",       "data_dir",    "checkpoint",  "workers",
                                                  "max_queue", "cache_size", "paint_width", "paint_height"};
      for (const auto& [key, value] : s.items())
        if (!known.count(key)) throw ConfigError("unknown key 'service." + key + "'");
      c.host = s.value("host", c.host);
      c.port = s.value("port", c.port);
      if (s.contains("data_dir")) c.data_dir = s["data_dir"].get<std::string>();
      if (s.contains("checkpoint"))
        c.checkpoint = s["checkpoint"].is_null() ? std::nullopt : std::optional(s["checkpoint"].get<std::string>());
      c.workers = s.value("workers", c.workers);
      c.max_queue = s.value("max_queue", c.max_queue);
      c.cache_size = s.value("cache_size", c.cache_size);
      c.paint_width = s.value("paint_width", c.paint_width);
      c.paint_height = s.value("paint_height", c.paint_height);
    }
    if (root.contains("cloth_edit")) {
      const json& e = root["cloth_edit"];
      for (const auto& [key, value] : e.items())
        if (key != "edge_threshold") throw ConfigError("unknown key 'cloth_edit." + key + "'");
      c.edge_threshold = e.value("edge_threshold", c.edge_threshold);
    }
    if (root.contains("paint")) c.paint = paint::generator_config_from_json(root["paint"]);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
}

ServiceConfig load_service_config(const fs::path& path) {
  ServiceConfig c;
  json root;
  try {
    root = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  } catch (const LoadError& e) {
    throw ConfigError(e.what());
  }
  apply_service_section(c, root);
  return c;
}

// --- PATCH parsing -------------------------------------------------------------

namespace {

bool is_int_in(const json& v, long long lo, long long hi) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) return false;
  const long long x = v.get<long long>();
  return x >= lo && x <= hi;
}

}  // namespace

DesignPatch parse_design_patch(const json& body) {
  if (!body.is_object()) throw ValidationError("request body must be a JSON object", {{"body", "must be an object"}});
  std::map<std::string, std::string> errors;
  DesignPatch patch;
  for (const auto& [key, value] : body.items()) {
    if (key != "expected_revision" && key != "target_color" && key != "placement" && key != "paint_asset_id")
      errors[key] = "unknown field";
  }
  if (!body.contains("expected_revision")) {
    errors["expected_revision"] = "required";
  } else if (!is_int_in(body["expected_revision"], 0, std::numeric_limits<long long>::max())) {
    errors["expected_revision"] = "must be a non-negative integer";
  } else {
    patch.expected_revision = body["expected_revision"].get<long long>();
  }
  if (body.contains("target_color")) {
    const json& c = body["target_color"];
    if (c.is_null()) {
      patch.update.target_color = std::optional<design::ColorRGB>();
    } else if (!c.is_object()) {
      errors["target_color"] = "must be an object {r, g, b} or null";
    } else {
      bool ok = true;
      for (const char* ch : {"r", "g", "b"}) {
        if (!c.contains(ch) || !is_int_in(c[ch], 0, 255)) {
          errors[std::string("target_color.") + ch] = "must be an integer in [0, 255]";
          ok = false;
        }
      }
      for (const auto& [key, value] : c.items())
        if (key != "r" && key != "g" && key != "b") errors["target_color." + key] = "unknown field";
      if (ok) patch.update.target_color = design::ColorRGB::from_ints(c["r"], c["g"], c["b"]);
    }
  }
  if (body.contains("placement")) {
    const json& p = body["placement"];
    if (p.is_null()) {
      patch.update.placement = std::optional<design::PaintPlacement>();
    } else if (!p.is_object()) {
      errors["placement"] = "must be an object {anchor_x, anchor_y, scale} or null";
    } else {
      bool ok = true;
      for (const char* k : {"anchor_x", "anchor_y"}) {
        if (!p.contains(k) || !is_int_in(p[k], -1000000, 1000000)) {
          errors[std::string("placement.") + k] = "must be an integer";
          ok = false;
        }
      }
      if (!p.contains("scale") || !p["scale"].is_number() || !(p["scale"].get<double>() > 0) ||
          !std::isfinite(p["scale"].get<double>())) {
        errors["placement.scale"] = "must be a number > 0";
        ok = false;
      }
      for (const auto& [key, value] : p.items())
        if (key != "anchor_x" && key != "anchor_y" && key != "scale") errors["placement." + key] = "unknown field";
      if (ok) patch.update.placement = design::PaintPlacement{p["anchor_x"], p["anchor_y"], p["scale"].get<double>()};
    }
  }
  if (body.contains("paint_asset_id")) {
    const json& a = body["paint_asset_id"];
    if (a.is_null()) {
      patch.update.paint_asset_id = std::optional<std::string>();
    } else if (!a.is_string() || a.get<std::string>().empty()) {
      errors["paint_asset_id"] = "must be a non-empty string or null";
    } else {
      patch.update.paint_asset_id = a.get<std::string>();
    }
  }
  if (errors.empty() && patch.update.empty()) {
    errors["body"] = "no design field to update";
  }
  if (!errors.empty()) throw ValidationError("invalid design update", errors);
  return patch;
}

// --- Studio --------------------------------------------------------------------

Studio::Studio(ServiceConfig config, std::shared_ptr<paint::HttpTransport> transport)
    : Studio(config, config.checkpoint ? tryon::load_predictor(*config.checkpoint) : nullptr, std::move(transport)) {}

Studio::Studio(ServiceConfig config, std::shared_ptr<const tryon::Predictor> predictor,
               std::shared_ptr<paint::HttpTransport> transport)
    : config_(std::move(config)),
      assets_(config_.data_dir / "assets"),
      sessions_(config_.data_dir / "sessions"),
      predictor_(std::move(predictor)),
      cache_(static_cast<std::size_t>(config_.cache_size)) {
  config_.validate();
  const fs::path patterns = config_.data_dir / "patterns";
  const fs::path avatars = config_.data_dir / "avatars";
  if (!fs::exists(patterns / "manifest.json")) {
    spdlog::info("seeding pattern catalog in {}", patterns.string());
    design::write_seed_catalog(patterns);
  }
  if (!fs::exists(avatars / "manifest.json")) {
    spdlog::info("seeding avatar gallery in {}", avatars.string());
    write_seed_gallery(avatars);
  }
  catalog_ = design::Catalog::load(patterns);
  avatars_ = AvatarGallery::load(avatars);
  backends_ = paint::make_backends(config_.paint, std::move(transport));
  pool_ = std::make_unique<WorkerPool>(static_cast<std::size_t>(config_.workers),
                                       static_cast<std::size_t>(config_.max_queue));
  spdlog::info("studio ready: {} patterns, {} avatars, model {}", catalog_.patterns().size(),
               avatars_.avatars().size(), predictor_ ? predictor_->id() : std::string("none"));
}

SessionRecord Studio::create_session(const std::string& pattern_id) {
  SessionRecord r;
  r.state = design::create_session(catalog_, pattern_id);
  r.created_at = r.updated_at = utc_now_iso8601();
  sessions_.create(r);
  return r;
}

SessionRecord Studio::get_session(const std::string& id) const { return sessions_.load(id); }

PaintResult Studio::generate_paint(const std::string& session_id, const std::string& prompt) {
  sessions_.load(session_id);
  const std::string refined = paint::refine_prompt(prompt, *backends_.refiner);
  paint::PaintAsset asset =
      paint::generate_paint(prompt, refined, *backends_.t2i, config_.paint_width, config_.paint_height);
  const std::string id = paint::store_asset(asset, assets_);
  spdlog::info("session {}: paint {} from '{}'", session_id, id, prompt);
  return {id, refined};
}

SessionRecord Studio::update_design(const std::string& session_id, long long expected_revision,
                                    const design::DesignUpdate& update) {
  if (update.empty()) throw ValidationError("no design field to update", {{"body", "no design field to update"}});
  return sessions_.update(
      session_id,
      [&](const SessionRecord& current) {
        if (current.state.revision != expected_revision) {
          throw RevisionConflictError("expected revision " + std::to_string(expected_revision) + " but session is at " +
                                          std::to_string(current.state.revision),
                                      current.state.revision);
        }
        if (update.paint_asset_id && *update.paint_asset_id && !assets_.contains(**update.paint_asset_id)) {
          throw NotFoundError("unknown paint asset '" + **update.paint_asset_id + "'");
        }
        const design::PatternSpec& pattern = catalog_.find(current.state.pattern_id);
        design::PlacementContext context{pattern.printable_region, [this](const std::string& asset_id) {
                                           const design::Raster img = assets_.load_image(asset_id);
                                           return design::Size{img.width(), img.height()};
                                         }};
        SessionRecord next = current;
        next.state = design::apply_design_update(current.state, update, context);
        next.updated_at = utc_now_iso8601();
        next.render_cache_key.reset();
        return next;
      },
      update);
}

std::shared_ptr<const RenderedImage> Studio::render(const std::string& session_id) {
  const SessionRecord record = sessions_.load(session_id);
  const std::string key = render_cache_key(record.state, config_.edge_threshold);
  std::shared_ptr<const RenderedImage> image = cache_.get(key);
  if (!image) {
    auto fresh = std::make_shared<RenderedImage>();
    fresh->raster = cloth_edit::render_design(
        record.state, catalog_, [this](const std::string& id) { return assets_.load_image(id); },
        {config_.edge_threshold});
    fresh->png = design::encode_png(fresh->raster);
    cache_.put(key, fresh);
    image = std::move(fresh);
  }
  if (record.render_cache_key != key) {
    sessions_.update(session_id, [&](const SessionRecord& current) {
      SessionRecord next = current;
      if (current.state.revision == record.state.revision) next.render_cache_key = key;
      return next;
    });
  }
  return image;
}

tryon::TryOnSample Studio::tryon_sample(const SessionRecord& record, const AvatarSpec& avatar) {
  const auto rendered = render(record.state.session_id);
  const design::PatternSpec& pattern = catalog_.find(record.state.pattern_id);
  tryon::TryOnSample sample = load_avatar_inputs(avatar);
  sample.cloth =
      tryon::raster_to_tensor(garment_cloth_image(rendered->raster, pattern.cloth_mask, avatar.width, avatar.height));
  return sample;
}

std::vector<std::uint8_t> Studio::try_on(const std::string& session_id, const std::string& avatar_id) {
  const SessionRecord record = sessions_.load(session_id);
  const AvatarSpec& avatar = avatars_.find(avatar_id);
  if (!predictor_) throw UnavailableError("no try-on checkpoint is loaded");
  auto sample = std::make_shared<tryon::TryOnSample>(tryon_sample(record, avatar));
  auto result = std::make_shared<nn::Tensor>();
  auto predictor = predictor_;
  std::future<void> done = pool_->submit([sample, result, predictor] { *result = predictor->predict(*sample); });
  const auto budget = std::chrono::duration<double>(config_.paint.timeout_seconds);
  if (done.wait_for(budget) != std::future_status::ready) {
    throw UnavailableError("try-on did not finish within " + std::to_string(config_.paint.timeout_seconds) + " s");
  }
  done.get();
  return design::encode_png(tryon::tensor_to_raster(*result));
}

}  // namespace mycloth::service
