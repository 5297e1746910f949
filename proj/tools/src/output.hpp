#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace symco::cli {

// Shortest round-trip decimal form.
std::string format_number(double v);

std::string sha256_hex(const std::string& bytes);

// Named output files held in memory until written; ordered by name.
using FileSet = std::map<std::string, std::string>;

// Writes every file, then manifest.json listing the configuration, seed, versions and file hashes.
void write_outputs(const std::filesystem::path& dir, const FileSet& files, const nlohmann::json& config);

nlohmann::json version_info();

}  // namespace symco::cli
