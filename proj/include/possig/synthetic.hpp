#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

namespace possig {

/// Settings for the synthetic event corpus used by fixtures and demos.
struct SyntheticConfig {
  std::size_t matches = 10;
  std::size_t teams = 4;
  std::size_t possessions_per_match = 40;
  std::uint64_t seed = 7;
};

/// Raw event records in the ingest schema (metres, per-period clock,
/// attacking direction switching at half time). Teams play a rotating
/// schedule so every team appears in several matches.
std::vector<nlohmann::json> synthetic_events(const SyntheticConfig& config);

void write_synthetic_events(std::ostream& out, const SyntheticConfig& config);

}  // namespace possig
