#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace torusflow {

const char* version();

/// printf-style fixed notation; "-0.000" is normalised to "0.000".
std::string fixed(double v, int precision);
/// Shortest representation that parses back to the same double.
std::string exact(double v);

std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t v);

/// Ordered key/value list describing a run's effective configuration.
using Settings = std::vector<std::pair<std::string, std::string>>;

/// FNV-1a of the settings in "key=value\n" form, sorted by key.
std::string config_hash(Settings settings);

/// Comment header ("# " prefix) naming the tool version, command, config hash and
/// every setting.
std::string comment_header(std::string_view command, const Settings& settings,
                           std::string_view prefix = "# ");

}  // namespace torusflow
