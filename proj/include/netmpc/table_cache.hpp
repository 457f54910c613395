#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "netmpc/offline_synthesis.hpp"

namespace netmpc {

/// Content hash of everything the synthesis output depends on (plant,
/// constraints, age bounds, chain, horizon and weights).
std::uint64_t params_hash(const SynthesisParams& sp);

/// Writes a versioned little-endian binary cache (magic, version, parameter
/// hash, dimension header, 8-byte-float matrices).  Throws std::runtime_error
/// on IO failure.
void save_tables(const SynthesisTables& tables, const std::string& path);

/// Reads a cache written by save_tables; throws std::runtime_error on a
/// missing file, bad magic or unsupported version.
SynthesisTables load_tables(const std::string& path);

/// load_tables if the file exists and its parameter hash matches sp;
/// std::nullopt otherwise (callers then recompute).
std::optional<SynthesisTables> try_load_tables(const std::string& path,
                                               const SynthesisParams& sp);

}  // namespace netmpc
