#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dagn/autodiff.hpp"

namespace dagn {

struct CheckpointHeader {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

// Single-file binary format: magic, header (seed + config hash), then one
// record per parameter — name, shape, and the value as little-endian 64-bit
// floats. Parameter order is the registration order, so identical weights
// serialize to identical bytes.
void save_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                     const std::vector<Parameter*>& params);

// Reads the header only.
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

// Loads values into the given parameters, matching records by name. Every
// parameter must be present with an identical shape, and the file must not
// contain extra records.
CheckpointHeader load_checkpoint(const std::filesystem::path& path,
                                 const std::vector<Parameter*>& params);

}  // namespace dagn
