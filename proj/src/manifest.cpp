#include "ng/manifest.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ng/error.hpp"

namespace ng {

namespace {

using nlohmann::json;

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

}  // namespace

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

std::string digest_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::string digest_string(const std::string& text) {
  return digest_hex(fnv1a64(
      {reinterpret_cast<const unsigned char*>(text.data()), text.size()}));
}

std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path);
  std::uint64_t h = kFnvOffset;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const auto n = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= kFnvPrime;
    }
    if (!in) break;
  }
  return digest_hex(h);
}

void write_stage_manifest(const std::string& artifact_path,
                          const StageManifest& manifest) {
  json doc;
  doc["stage"] = manifest.stage;
  doc["config_hash"] = manifest.config_hash;
  json inputs = json::object();
  for (const auto& [role, path] : manifest.input_paths) {
    json entry;
    entry["path"] = path;
    auto it = manifest.input_digests.find(role);
    if (it != manifest.input_digests.end()) entry["digest"] = it->second;
    inputs[role] = std::move(entry);
  }
  doc["inputs"] = std::move(inputs);
  if (!manifest.metadata_digest.empty())
    doc["metadata_digest"] = manifest.metadata_digest;

  const std::string path = artifact_path + ".manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open file for writing: " + path);
  out << doc.dump(2) << "\n";
}

std::optional<StageManifest> read_stage_manifest(
    const std::string& artifact_path) {
  const std::string path = artifact_path + ".manifest.json";
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError(path + ": malformed manifest (" + e.what() + ")");
  }
  StageManifest manifest;
  if (doc.contains("stage")) manifest.stage = doc["stage"];
  if (doc.contains("config_hash")) manifest.config_hash = doc["config_hash"];
  if (doc.contains("metadata_digest"))
    manifest.metadata_digest = doc["metadata_digest"];
  if (doc.contains("inputs"))
    for (const auto& [role, entry] : doc["inputs"].items()) {
      if (entry.contains("path")) manifest.input_paths[role] = entry["path"];
      if (entry.contains("digest"))
        manifest.input_digests[role] = entry["digest"];
    }
  return manifest;
}

}  // namespace ng
