#pragma once

#include <map>
#include <string>

#include "freqboot/config.hpp"
#include "freqboot/network.hpp"

// Checkpoint archive: one file holding both parameter trees (named,
// shape-tagged, little-endian float32), the experiment config, the random-
// stream derivation state (seed / epoch / step), and the epoch counter.
// Layout: 8-byte magic, u64 header length, JSON header, raw float32 payload.
// Writes go to a temp file in the same directory, then rename.

namespace freqboot::ckpt {

struct Checkpoint {
  cfg::ExperimentConfig config;
  std::string config_hash;
  long epoch = 0;
  long global_step = 0;
  long in_channels = 0;
  long in_len = 0;
  std::map<std::string, Tensor<float>> tensors;
};

void save_checkpoint(const std::string& path, net::DualNetworkState<float>& state,
                     const cfg::ExperimentConfig& config, long epoch, long global_step,
                     long in_channels, long in_len);

Checkpoint load_checkpoint(const std::string& path);

/// Rebuild the dual network from the embedded config and fill every
/// parameter and buffer by name. The checkpoint's name set must match the
/// rebuilt network's exactly.
net::DualNetworkState<float> restore_network(const Checkpoint& c);

}  // namespace freqboot::ckpt
