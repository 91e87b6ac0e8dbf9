#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "freqboot/config.hpp"
#include "freqboot/data.hpp"
#include "freqboot/network.hpp"

// Downstream protocols: linear probe on a frozen encoder, semi-supervised
// fine-tuning on a label fraction, and the two baselines (supervised from
// scratch, frozen random encoder). Metrics are accuracy and macro-F1.

namespace freqboot::eval {

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;
};

/// accuracy = mean(preds == labels); per-class F1 = 2PR/(P+R) with 0 when
/// P+R == 0; macro-F1 = unweighted mean over all num_classes classes.
Metrics compute_metrics(const std::vector<long>& preds, const std::vector<std::int64_t>& labels,
                        long num_classes);

struct EvalReport {
  std::string protocol;  // linear | semisup | supervised_baseline | random_init_baseline
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;
  double label_fraction = 1.0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<std::string> warnings;

  std::string to_json(int indent = 2) const;
};

/// Frozen eval-mode encoder representations, flattened to [n, C_enc * T_enc].
Tensor<float> embed(net::DualNetworkState<float>& state, const data::TimeSeriesDataset& ds,
                    long batch_size = 256);

/// Train one linear layer on frozen encoder features; report test metrics.
EvalReport linear_evaluate(net::DualNetworkState<float>& state,
                           const data::TimeSeriesDataset& train_ds,
                           const data::TimeSeriesDataset& test_ds,
                           const cfg::ExperimentConfig& cfg, std::uint64_t seed);

/// Subsample the train labels, fine-tune the full online encoder plus a
/// linear classifier, report test metrics tagged with the fraction.
EvalReport finetune_semisupervised(net::DualNetworkState<float>& state,
                                   const data::TimeSeriesDataset& train_ds,
                                   const data::TimeSeriesDataset& test_ds, double fraction,
                                   const cfg::ExperimentConfig& cfg, std::uint64_t seed);

/// Encoder + classifier trained end-to-end from random init (all labels).
EvalReport run_supervised_baseline(const cfg::ExperimentConfig& cfg,
                                   const data::TimeSeriesDataset& train_ds,
                                   const data::TimeSeriesDataset& test_ds, std::uint64_t seed);

/// Linear probe on a frozen randomly-initialized encoder.
EvalReport run_random_init_baseline(const cfg::ExperimentConfig& cfg,
                                    const data::TimeSeriesDataset& train_ds,
                                    const data::TimeSeriesDataset& test_ds, std::uint64_t seed);

/// CSV `index,label,e_0..e_{d-1}` of frozen representations of `ds`.
void export_embeddings(net::DualNetworkState<float>& state, const data::TimeSeriesDataset& ds,
                       const std::string& out_path);

/// Appends the report to <out_dir>/reports.jsonl and rebuilds
/// <out_dir>/results_table.csv (method, seed count, mean/std of accuracy and
/// macro-F1 per method, grouped over seeds).
void append_report(const std::string& out_dir, const EvalReport& report);
void write_results_table(const std::string& out_dir);

}  // namespace freqboot::eval
