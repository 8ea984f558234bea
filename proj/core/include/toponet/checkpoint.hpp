#pragma once

#include "toponet/network.hpp"

#include <cstdint>
#include <string>

namespace toponet {

inline constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointInfo {
    uint32_t version = 0;
    uint64_t config_hash = 0;
    int epoch = 0;
};

// Binary container: magic "TPNC", version, config hash, epoch, architecture
// dims, then per-stage graph, alpha, node parameters and running stats.
// save -> load -> save is byte-identical.
void save_checkpoint(const std::string& path, const Network& net, uint64_t config_hash,
                     int epoch);

// Reads a checkpoint into a freshly built network carrying the same spec.
CheckpointInfo load_checkpoint(const std::string& path, Network& net);

// Header plus a human-readable summary, for `inspect`.
std::string describe_checkpoint(const std::string& path);

} // namespace toponet
