#pragma once

#include <filesystem>

#include "json.hpp"

#include "fpclust/model.hpp"

namespace fpclust {

inline constexpr int kDrawsSchemaVersion = 1;

/// Writes one little-endian binary array per parameter block per chain
/// (chain<c>_<block>.f64 / .i32, snapshot-major), manifest.json and
/// timing.json. Labels
/// are stored 1-based. Returns the manifest.
nlohmann::json save_draws(const PosteriorDraws& draws, const std::filesystem::path& dir);

/// Reads a directory written by save_draws, verifying file hashes.
PosteriorDraws load_draws(const std::filesystem::path& dir);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace fpclust
