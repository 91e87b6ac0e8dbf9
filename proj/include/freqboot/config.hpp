#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "freqboot/augmentations.hpp"
#include "freqboot/network.hpp"

// Experiment configuration: one JSON document covering data location, model,
// augmentation, and training settings. Unknown keys are rejected so typos
// fail loudly instead of silently running defaults.

namespace freqboot::cfg {

struct DataConfig {
  std::string root;
  bool resplit = false;  // re-split the union of stored splits 60/20/20 instead of using them as-is
  double train_frac = 0.6;
  double val_frac = 0.2;
  double test_frac = 0.2;
};

struct TrainSection {
  long epochs = 40;
  long batch_size = 128;
  double lr = 3e-4;
  double weight_decay = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double lambda = 0.51;
  long downstream_epochs = 40;
  long downstream_batch_size = 128;
  double downstream_lr = 3e-4;

  void validate() const {
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch_size < 2) throw ConfigError("train: batch_size must be >= 2 (batch norm needs it)");
    if (!(lr > 0.0)) throw ConfigError("train: lr must be > 0");
    if (weight_decay < 0.0) throw ConfigError("train: weight_decay must be >= 0");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
      throw ConfigError("train: betas must be in [0,1)");
    if (!std::isfinite(lambda)) throw ConfigError("train: lambda must be finite");
    if (downstream_epochs < 1) throw ConfigError("train: downstream_epochs must be >= 1");
    if (downstream_batch_size < 2) throw ConfigError("train: downstream_batch_size must be >= 2");
    if (!(downstream_lr > 0.0)) throw ConfigError("train: downstream_lr must be > 0");
  }
};

struct ExperimentConfig {
  std::uint64_t seed = 1234;
  bool strict_determinism = false;
  DataConfig data;
  net::ModelConfig model;
  aug::AugmentationConfig augmentation;
  TrainSection train;

  void validate() const {
    model.validate();
    augmentation.validate();
    train.validate();
  }
};

/// Parse from a JSON document (string form). Missing keys take defaults;
/// unknown keys are ConfigErrors.
ExperimentConfig parse_config(const std::string& json_text);

/// Load + parse a config file.
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON serialization (sorted keys, fixed field set).
std::string to_json(const ExperimentConfig& cfg, int indent = -1);

/// FNV-1a 64-bit hash of the canonical serialization, as 16 hex chars.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace freqboot::cfg
