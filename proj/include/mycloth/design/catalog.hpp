#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mycloth/design/types.hpp"

namespace mycloth::design {

// Designer-provided pattern collection loaded from
//   <dir>/manifest.json, <dir>/<id>/base.png, <dir>/<id>/mask.png
//
// manifest.json:
//   {"patterns": [{"id": "crew", "display_name": "Crew Neck",
//                  "printable_region": {"x": 80, "y": 90, "w": 96, "h": 110}}]}
class Catalog {
 public:
  Catalog() = default;

  // A directory without manifest.json is an empty catalog. A missing
  // directory, a malformed manifest or a dangling image reference throws
  // ConfigError.
  static Catalog load(const std::filesystem::path& dir);

  // Sorted by pattern_id.
  const std::vector<PatternSpec>& patterns() const { return patterns_; }
  const PatternSpec& find(const std::string& pattern_id) const;  // NotFoundError
  bool contains(const std::string& pattern_id) const;

 private:
  std::vector<PatternSpec> patterns_;
};

const std::vector<PatternSpec>& list_patterns(const Catalog& catalog);

// Writes three procedurally drawn T-shirt patterns (crew, long-sleeve,
// v-neck) in catalog layout.
void write_seed_catalog(const std::filesystem::path& dir);

}  // namespace mycloth::design
