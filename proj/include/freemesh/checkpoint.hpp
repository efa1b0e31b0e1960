#pragma once

// Run manifest and the single-file checkpoint container:
//   "FMCK", u32 version, u64 manifest length, manifest JSON,
//   five length-prefixed weight streams (policy, q1, q2, q1 target, q2 target),
//   f64 log alpha.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "freemesh/mesh_env.hpp"
#include "freemesh/sac.hpp"

namespace freemesh {

inline constexpr const char* kVersionTag = "freemesh 0.1.0";

struct RunManifest {
  EnvConfig env;
  sac::SacConfig sac;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::string version = kVersionTag;
  std::string domain;       // boundary file or generator description
  std::string output_dir;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

std::vector<std::uint8_t> encode_checkpoint(const sac::SacAgent& agent, const RunManifest& manifest);

struct LoadedCheckpoint {
  RunManifest manifest;
  sac::SacAgent agent;
};

/// Optimiser moments are not stored; the loaded agent starts with fresh Adam state.
LoadedCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const sac::SacAgent& agent, const RunManifest& manifest);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace freemesh
