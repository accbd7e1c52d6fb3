#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace senmfk {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

struct StageRecord {
  std::string name;
  /// Digest over the stage's settings and input file digests.
  std::string fingerprint;
  std::map<std::string, std::string> outputs;  // file name -> digest
  double seconds = 0.0;
};

/// Everything needed to reproduce a run: settings, input digests, tool version
/// and per-stage records. Lives in `manifest.json` inside the workspace.
struct RunManifest {
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::string> inputs;  // path -> digest
  std::string tool_version = SENMFK_VERSION;
  std::vector<StageRecord> stages;

  const StageRecord* find(std::string_view stage) const;
  void upsert(StageRecord record);

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);

  static std::optional<RunManifest> load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace senmfk
