#include "senmfk/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <memory>

#include "senmfk/error.hpp"
#include "senmfk/io.hpp"

namespace senmfk {

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error(ErrorKind::Io, "SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(io::read_text(path)); }

const StageRecord* RunManifest::find(std::string_view stage) const {
  for (const auto& s : stages) {
    if (s.name == stage) return &s;
  }
  return nullptr;
}

void RunManifest::upsert(StageRecord record) {
  for (auto& s : stages) {
    if (s.name == record.name) {
      s = std::move(record);
      return;
    }
  }
  stages.push_back(std::move(record));
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json st = nlohmann::json::array();
  for (const auto& s : stages) {
    st.push_back({{"name", s.name}, {"fingerprint", s.fingerprint}, {"outputs", s.outputs}, {"seconds", s.seconds}});
  }
  return {{"tool_version", tool_version}, {"config", config}, {"inputs", inputs}, {"stages", st}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.tool_version = j.value("tool_version", std::string{});
  m.config = j.value("config", nlohmann::json::object());
  m.inputs = j.value("inputs", std::map<std::string, std::string>{});
  for (const auto& s : j.value("stages", nlohmann::json::array())) {
    m.stages.push_back({s.at("name").get<std::string>(), s.at("fingerprint").get<std::string>(),
                        s.at("outputs").get<std::map<std::string, std::string>>(), s.value("seconds", 0.0)});
  }
  return m;
}

std::optional<RunManifest> RunManifest::load(const std::string& path) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return from_json(nlohmann::json::parse(io::read_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, path + ": " + e.what());
  }
}

void RunManifest::save(const std::string& path) const { io::write_text(path, to_json().dump(2) + "\n"); }

}  // namespace senmfk
