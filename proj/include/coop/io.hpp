#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

namespace coop {

// Fixed 17-significant-digit decimal; round-trips every double.
std::string fmt17(double v);

std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t v);

// Provenance stamped on every output file.
struct OutputMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version = COOP_VERSION;
  std::string config_text;
};

// "# key=value" comment lines for CSV headers.
std::string csv_preamble(const OutputMeta& meta);

// JSON text with 2-space indent whose floating-point values use fmt17.
std::string dump_json(const nlohmann::ordered_json& j);

// {"version", "config_hash", "seed", "config"} block for JSON outputs.
nlohmann::ordered_json meta_json(const OutputMeta& meta);

}  // namespace coop
