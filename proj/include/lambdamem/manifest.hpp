#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

// Reproducibility records: every command that writes results also writes a
// manifest.json into its output directory — resolved configuration snapshot,
// tool version, input digests, output paths, wall-clock time. The manifest is
// written first (so no orphan results can exist) and finalized with timing
// once the run completes.

namespace lambdamem {

inline constexpr const char* kToolVersion = "1.0.0";

struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string command;         // subcommand plus its arguments
  std::string created_utc;     // ISO 8601, filled by write_manifest if empty
  std::string resolved_config; // canonical config text (see to_config_text)
  std::vector<std::pair<std::string, std::string>> input_digests;
  std::vector<std::string> output_files;
  double wall_ms = 0.0;
};

// 64-bit FNV-1a content digest.
std::uint64_t fnv1a64(const void* data, std::size_t size);
// Digest of a file's bytes, as 16 hex digits. Throws std::runtime_error on
// read failure.
std::string fnv1a64_hex_file(const std::string& path);

// Writes <out_dir>/manifest.json. Throws std::runtime_error on I/O failure.
void write_manifest(const std::string& out_dir, const RunManifest& manifest);

// Extracts the resolved-config text back out of a manifest file.
std::string manifest_resolved_config(const std::string& path);

}  // namespace lambdamem
