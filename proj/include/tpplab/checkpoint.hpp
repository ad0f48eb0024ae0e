#pragma once

/*
 * Model persistence.  Checkpoints are single JSON documents carrying the
 * network configuration and every parameter; doubles round-trip through the
 * serializer byte-identically (shortest-representation printing), which the
 * CLI determinism contract relies on.
 */

#include <cstdint>
#include <string>

#include "json.hpp"

#include "tpplab/rnn.hpp"

namespace tpplab {

inline constexpr const char* kToolVersion = "tpplab 0.1.0";

nlohmann::json config_to_json(const RnnConfig& cfg);
RnnConfig config_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const RnnParams& p);
RnnParams params_from_json(const RnnConfig& cfg, const nlohmann::json& j);

void save_checkpoint(const std::string& path, const RnnConfig& cfg, const RnnParams& p,
                     const nlohmann::json& extra = nlohmann::json::object());
// loads into cfg/params; returns the full document for callers that want extras
nlohmann::json load_checkpoint(const std::string& path, RnnConfig& cfg, RnnParams& p);

// FNV-1a over a canonical JSON dump; stable tag for artifact file names
std::uint64_t fnv1a_hash(const std::string& bytes);
std::string config_hash(const nlohmann::json& j); // 16 hex chars

// shared small helpers for writing artifacts
void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

} // namespace tpplab
