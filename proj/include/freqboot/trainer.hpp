#pragma once

#include <string>
#include <vector>

#include "freqboot/checkpoint.hpp"
#include "freqboot/config.hpp"
#include "freqboot/data.hpp"
#include "freqboot/objective.hpp"
#include "freqboot/optimizer.hpp"

// Self-supervised pretraining loop. Each step: build the view pair, online
// forward on x1, target forward on x2 (gradients severed), backward on the
// combined loss, one AdamW step on the online tree, one EMA update of the
// target tree. That order is fixed.

namespace freqboot::train {

struct TrainLogRecord {
  long epoch = 0;
  long step = 0;
  double l_lfb = 0.0;
  double l_hfb = 0.0;
  double l_total = 0.0;
  double wallclock_s = 0.0;
};

struct StepCounters {
  long optimizer_steps = 0;
  long ema_updates = 0;
};

/// One training step on `batch`. Returns the loss breakdown; mutates state
/// and optimizer. `step_seed` drives augmentation and dropout randomness.
objective::LossBreakdown train_step(const Tensor<float>& batch,
                                    net::DualNetworkState<float>& state, opt::AdamW<float>& optim,
                                    const cfg::ExperimentConfig& cfg, std::uint64_t step_seed,
                                    StepCounters* counters = nullptr);

struct PretrainResult {
  std::string best_checkpoint;
  std::string last_checkpoint;
  std::vector<double> epoch_mean_loss;
  long total_steps = 0;
  StepCounters counters;
};

/// Full pretraining run on the train split. Writes train_log.csv, one
/// checkpoint per epoch, and best.ckpt (lowest epoch-mean loss) under
/// out_dir. Only accepts a dataset tagged as the train split.
PretrainResult pretrain(const cfg::ExperimentConfig& cfg, const data::TimeSeriesDataset& train_ds,
                        const std::string& out_dir);

/// Rows of ds at positions [first, first+count) of `order`, as a batch.
Tensor<float> gather_batch(const data::TimeSeriesDataset& ds, const std::vector<long>& order,
                           long first, long count);

}  // namespace freqboot::train
