#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

namespace ng {

// FNV-1a 64-bit content digests; cheap, stable, good enough to detect mixed
// artifact snapshots (not a cryptographic guarantee).
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::string digest_hex(std::uint64_t value);
std::string digest_string(const std::string& text);
std::string digest_file(const std::string& path);

// Sidecar "<artifact>.manifest.json" written next to every pipeline
// artifact. metadata_digest identifies the corpus snapshot and is
// propagated down the stage chain so eval can refuse mixed inputs.
struct StageManifest {
  std::string stage;
  std::string config_hash;
  std::map<std::string, std::string> input_paths;    // role -> path
  std::map<std::string, std::string> input_digests;  // role -> digest
  std::string metadata_digest;
};

void write_stage_manifest(const std::string& artifact_path,
                          const StageManifest& manifest);
std::optional<StageManifest> read_stage_manifest(
    const std::string& artifact_path);

}  // namespace ng
