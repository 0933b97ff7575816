#include "lambdamem/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lambdamem {

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string fnv1a64_hex_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
  return hex;
}

namespace {
std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}
}  // namespace

void write_manifest(const std::string& out_dir, const RunManifest& manifest) {
  nlohmann::json j;
  j["tool_version"] = manifest.tool_version;
  j["command"] = manifest.command;
  j["created_utc"] =
      manifest.created_utc.empty() ? utc_now() : manifest.created_utc;
  j["resolved_config"] = manifest.resolved_config;
  nlohmann::json digests = nlohmann::json::object();
  for (const auto& [path, digest] : manifest.input_digests) digests[path] = digest;
  j["input_digests"] = digests;
  j["output_files"] = manifest.output_files;
  j["wall_ms"] = manifest.wall_ms;

  const std::string path = out_dir + "/manifest.json";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::string manifest_resolved_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  nlohmann::json j;
  in >> j;
  return j.at("resolved_config").get<std::string>();
}

}  // namespace lambdamem
