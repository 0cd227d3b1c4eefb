#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace promptforge::cli {

/// Everything needed to audit or repeat a run.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    /// Resolved settings, one "key = value" line each.
    std::string config_snapshot;
    std::map<std::string, std::uint64_t> seeds;
    std::string backend_kind;
    std::string engine;
    /// Input path -> SHA-256 of its contents.
    std::map<std::string, std::string> input_digests;
    std::vector<std::string> outputs;
    std::chrono::system_clock::time_point started_at;
    std::chrono::system_clock::time_point finished_at;
    std::uint64_t call_count = 0;
    bool succeeded = true;
    std::optional<std::string> failure;
};

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

inline constexpr const char* kManifestName = "manifest.json";

std::string to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

/// Writes dir/manifest.json atomically (temporary file, then rename).
void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir);
RunManifest read_manifest(const std::filesystem::path& dir);

/// Inputs whose current digest differs from the recorded one (or that vanished).
std::vector<std::string> changed_inputs(const RunManifest& manifest);

} // namespace promptforge::cli
