#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mycloth/design/design_state.hpp"

namespace mycloth::service {

struct SessionRecord {
  design::DesignState state;
  std::string created_at;
  std::string updated_at;
  // Key of the last render; cleared whenever the revision moves.
  std::optional<std::string> render_cache_key;

  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

nlohmann::json to_json(const design::DesignState& state);
design::DesignState design_state_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionRecord& record);
SessionRecord session_record_from_json(const nlohmann::json& j);

nlohmann::json to_json(const design::DesignUpdate& update);
design::DesignUpdate design_update_from_json(const nlohmann::json& j);

// One JSON document per session under <dir>/<id>.json, replaced atomically
// (temp file + rename). A document that fails to parse is moved to
// <dir>/quarantine/ and every later access raises GoneError. Each
// successful update also appends {revision, update} to <dir>/<id>.journal.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path dir);

  void create(const SessionRecord& record);
  SessionRecord load(const std::string& session_id) const;  // NotFoundError, GoneError
  bool exists(const std::string& session_id) const;

  // Runs `mutate` on the current record under the session's lock and
  // persists the result. The journal entry is written only when
  // `journal_update` is set.
  SessionRecord update(const std::string& session_id,
                       const std::function<SessionRecord(const SessionRecord&)>& mutate,
                       const std::optional<design::DesignUpdate>& journal_update = std::nullopt);

  // Journal entries in append order.
  std::vector<std::pair<long long, design::DesignUpdate>> journal(const std::string& session_id) const;

  std::filesystem::path record_path(const std::string& session_id) const;
  const std::filesystem::path& dir() const { return dir_; }

  // Test hook: runs after the temp file is written and before the rename.
  void set_before_commit(std::function<void(const std::filesystem::path& temp)> hook) {
    before_commit_ = std::move(hook);
  }

 private:
  std::mutex& lock_for(const std::string& session_id) const;
  void write_record(const SessionRecord& record) const;
  SessionRecord read_record(const std::string& session_id) const;

  std::filesystem::path dir_;
  mutable std::mutex table_mutex_;
  mutable std::map<std::string, std::unique_ptr<std::mutex>> locks_;
  mutable std::set<std::string> quarantined_;
  std::function<void(const std::filesystem::path&)> before_commit_;
};

// Session ids are lowercase hex; anything else could escape the store.
bool valid_session_id(const std::string& session_id);

}  // namespace mycloth::service
