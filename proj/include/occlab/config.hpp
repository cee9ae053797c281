#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "occlab/harness.hpp"
#include "occlab/process.hpp"

namespace occlab {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Comma-separated names accepted under process.kind.
std::string valid_process_kinds();

/// Builds a process from its config object. Every error is a config error
/// whose message starts with the key path, e.g. "process.hurst: ...".
ProcessSpec process_from_json(const nlohmann::json& node, const std::string& path = "process");

/// Parses and validates a config document. Unknown keys are rejected.
ExperimentConfig parse_config_text(std::string_view text);
/// Same, from a file; config error if it cannot be read.
ExperimentConfig parse_config(const std::string& path);

/// FNV-1a (64 bit) of the document dumped with sorted keys and no
/// whitespace, so reordering fields or reformatting does not change it.
std::uint64_t config_hash(std::string_view text);
std::string hex64(std::uint64_t value);

}  // namespace occlab
