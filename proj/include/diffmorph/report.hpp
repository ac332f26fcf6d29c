// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace diffmorph {

/// Report envelope shared by every command:
///   tool {name, version}, command, seed, config, config_digest,
///   inputs [{path, sha256}], conventions, results.
/// Object keys are emitted sorted, so identical inputs give identical bytes.
nlohmann::json make_report(const std::string& command, const nlohmann::json& config,
                           const std::vector<std::filesystem::path>& inputs, std::uint64_t seed,
                           nlohmann::json results);

/// Pretty-printed JSON with a trailing newline.
std::string render_json(const nlohmann::json& report);

/// Flattens `results` into "path,value" CSV rows (arrays indexed by position).
std::string render_csv(const nlohmann::json& report);

}  // namespace diffmorph
