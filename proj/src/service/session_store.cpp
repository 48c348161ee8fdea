#include "mycloth/service/session_store.hpp"

#include <fstream>

#include <spdlog/spdlog.h>

#include "mycloth/common/error.hpp"
#include "mycloth/common/util.hpp"

namespace mycloth::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json color_json(const design::ColorRGB& c) { return {{"r", c.r}, {"g", c.g}, {"b", c.b}}; }
json placement_json(const design::PaintPlacement& p) {
  return {{"anchor_x", p.anchor_x}, {"anchor_y", p.anchor_y}, {"scale", p.scale}};
}

design::ColorRGB color_from(const json& j) {
  return design::ColorRGB::from_ints(j.at("r").get<int>(), j.at("g").get<int>(), j.at("b").get<int>());
}
design::PaintPlacement placement_from(const json& j) {
  return {j.at("anchor_x").get<int>(), j.at("anchor_y").get<int>(), j.at("scale").get<double>()};
}

template <typename T, typename F>
json optional_json(const std::optional<T>& v, F to) {
  return v ? to(*v) : json(nullptr);
}

}  // namespace

json to_json(const design::DesignState& s) {
  return {{"session_id", s.session_id},
          {"pattern_id", s.pattern_id},
          {"target_color", optional_json(s.target_color, color_json)},
          {"paint_asset_id", s.paint_asset_id ? json(*s.paint_asset_id) : json(nullptr)},
          {"placement", optional_json(s.placement, placement_json)},
          {"revision", s.revision}};
}

design::DesignState design_state_from_json(const json& j) {
  design::DesignState s;
  s.session_id = j.at("session_id").get<std::string>();
  s.pattern_id = j.at("pattern_id").get<std::string>();
  if (!j.at("target_color").is_null()) s.target_color = color_from(j["target_color"]);
  if (!j.at("paint_asset_id").is_null()) s.paint_asset_id = j["paint_asset_id"].get<std::string>();
  if (!j.at("placement").is_null()) s.placement = placement_from(j["placement"]);
  s.revision = j.at("revision").get<long long>();
  return s;
}

json to_json(const SessionRecord& r) {
  json j = to_json(r.state);
  j["created_at"] = r.created_at;
  j["updated_at"] = r.updated_at;
  j["render_cache_key"] = r.render_cache_key ? json(*r.render_cache_key) : json(nullptr);
  return j;
}

SessionRecord session_record_from_json(const json& j) {
  SessionRecord r;
  r.state = design_state_from_json(j);
  r.created_at = j.at("created_at").get<std::string>();
  r.updated_at = j.at("updated_at").get<std::string>();
  if (!j.at("render_cache_key").is_null()) r.render_cache_key = j["render_cache_key"].get<std::string>();
  return r;
}

json to_json(const design::DesignUpdate& u) {
  json j = json::object();
  if (u.target_color) j["target_color"] = optional_json(*u.target_color, color_json);
  if (u.paint_asset_id) j["paint_asset_id"] = *u.paint_asset_id ? json(**u.paint_asset_id) : json(nullptr);
  if (u.placement) j["placement"] = optional_json(*u.placement, placement_json);
  return j;
}

design::DesignUpdate design_update_from_json(const json& j) {
  design::DesignUpdate u;
  if (j.contains("target_color"))
    u.target_color = j["target_color"].is_null() ? std::optional<design::ColorRGB>() : color_from(j["target_color"]);
  if (j.contains("paint_asset_id"))
    u.paint_asset_id =
        j["paint_asset_id"].is_null() ? std::optional<std::string>() : j["paint_asset_id"].get<std::string>();
  if (j.contains("placement"))
    u.placement = j["placement"].is_null() ? std::optional<design::PaintPlacement>() : placement_from(j["placement"]);
  return u;
}

bool valid_session_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id)
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  return true;
}

SessionStore::SessionStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) throw StorageError("cannot create session directory " + dir_.string());
  if (fs::is_directory(dir_ / "quarantine")) {
    for (const auto& entry : fs::directory_iterator(dir_ / "quarantine")) {
      quarantined_.insert(entry.path().stem().string());
    }
  }
}

fs::path SessionStore::record_path(const std::string& id) const { return dir_ / (id + ".json"); }

std::mutex& SessionStore::lock_for(const std::string& id) const {
  std::lock_guard guard(table_mutex_);
  auto& slot = locks_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void SessionStore::write_record(const SessionRecord& record) const {
  const fs::path path = record_path(record.state.session_id);
  fs::path temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    out << to_json(record).dump(2) << "\n";
    out.flush();
    if (!out) throw StorageError("cannot write " + temp.string());
  }
  if (before_commit_) before_commit_(temp);
  std::error_code ec;
  fs::rename(temp, path, ec);
  if (ec) throw StorageError("cannot replace " + path.string() + ": " + ec.message());
}

SessionRecord SessionStore::read_record(const std::string& id) const {
  if (!valid_session_id(id)) throw NotFoundError("unknown session '" + id + "'");
  {
    std::lock_guard guard(table_mutex_);
    if (quarantined_.count(id)) throw GoneError("session '" + id + "' was corrupt and has been quarantined");
  }
  const fs::path path = record_path(id);
  if (!fs::exists(path)) throw NotFoundError("unknown session '" + id + "'");
  const std::string text = read_text_file(path);
  try {
    SessionRecord r = session_record_from_json(json::parse(text));
    if (r.state.session_id != id) throw StorageError("session id mismatch");
    return r;
  } catch (const std::exception& e) {
    std::error_code ec;
    fs::create_directories(dir_ / "quarantine", ec);
    fs::rename(path, dir_ / "quarantine" / path.filename(), ec);
    {
      std::lock_guard guard(table_mutex_);
      quarantined_.insert(id);
    }
    spdlog::error("session {} is corrupt ({}); moved to quarantine", id, e.what());
    throw GoneError("session '" + id + "' was corrupt and has been quarantined");
  }
}

void SessionStore::create(const SessionRecord& record) {
  if (!valid_session_id(record.state.session_id)) throw ValidationError("invalid session id");
  std::lock_guard lock(lock_for(record.state.session_id));
  if (fs::exists(record_path(record.state.session_id))) {
    throw InvalidStateError("session '" + record.state.session_id + "' already exists");
  }
  write_record(record);
}

SessionRecord SessionStore::load(const std::string& id) const {
  if (!valid_session_id(id)) throw NotFoundError("unknown session '" + id + "'");
  std::lock_guard lock(lock_for(id));
  return read_record(id);
}

bool SessionStore::exists(const std::string& id) const {
  return valid_session_id(id) && fs::exists(record_path(id));
}

SessionRecord SessionStore::update(const std::string& id,
                                   const std::function<SessionRecord(const SessionRecord&)>& mutate,
                                   const std::optional<design::DesignUpdate>& journal_update) {
  if (!valid_session_id(id)) throw NotFoundError("unknown session '" + id + "'");
  std::lock_guard lock(lock_for(id));
  const SessionRecord current = read_record(id);
  SessionRecord next = mutate(current);
  if (next == current) return current;
  write_record(next);
  if (journal_update) {
    std::ofstream journal(dir_ / (id + ".journal"), std::ios::app);
    journal << json{{"revision", next.state.revision}, {"update", to_json(*journal_update)}}.dump() << "\n";
    if (!journal) spdlog::warn("could not append to journal of session {}", id);
  }
  return next;
}

std::vector<std::pair<long long, design::DesignUpdate>> SessionStore::journal(const std::string& id) const {
  std::vector<std::pair<long long, design::DesignUpdate>> out;
  if (!valid_session_id(id)) throw NotFoundError("unknown session '" + id + "'");
  std::ifstream in(dir_ / (id + ".journal"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    out.emplace_back(j.at("revision").get<long long>(), design_update_from_json(j.at("update")));
  }
  return out;
}

}  // namespace mycloth::service
