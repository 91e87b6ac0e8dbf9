#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "freqboot/checkpoint.hpp"
#include "freqboot/config.hpp"
#include "freqboot/data.hpp"
#include "freqboot/evaluation.hpp"
#include "freqboot/kernels.hpp"
#include "freqboot/trainer.hpp"

// Command-line front end: pretrain, eval, ablate, synth-gen,
// export-embeddings. Exit codes: 0 success, 1 configuration error, 2 data
// error, 3 divergence. FREQBOOT_NUM_THREADS caps compute threads.

namespace fs = std::filesystem;
using namespace freqboot;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string data_root;
  std::string out_dir;
  std::int64_t seed = -1;  // -1: keep the config's seed
  bool strict = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool need_config, bool need_data, bool need_out) {
  auto* c = cmd->add_option("--config", a.config_path, "experiment config JSON");
  auto* d = cmd->add_option("--data", a.data_root, "dataset directory");
  auto* o = cmd->add_option("--out", a.out_dir, "output directory");
  if (need_config) c->required();
  if (need_data) d->required();
  if (need_out) o->required();
  cmd->add_option("--seed", a.seed, "override the config seed");
  cmd->add_flag("--strict-determinism", a.strict,
                "byte-identical outputs (zeroes wallclock fields)");
}

cfg::ExperimentConfig resolve_config(const CommonArgs& a) {
  cfg::ExperimentConfig c = cfg::load_config(a.config_path);
  if (!a.data_root.empty()) c.data.root = a.data_root;
  if (a.seed >= 0) c.seed = static_cast<std::uint64_t>(a.seed);
  if (a.strict) c.strict_determinism = true;
  if (c.data.root.empty()) throw ConfigError("no dataset directory: set --data or data.root");
  return c;
}

struct LoadedData {
  data::TimeSeriesDataset train, val, test;
};

/// Stored splits as-is, or (with data.resplit) a fresh stratified re-split of
/// their union, z-scored from the effective train split.
LoadedData load_experiment_data(const cfg::ExperimentConfig& c) {
  LoadedData out;
  if (!c.data.resplit) {
    out.train = data::load_dataset(c.data.root, "train");
    out.val = data::load_dataset(c.data.root, "val");
    out.test = data::load_dataset(c.data.root, "test");
    return out;
  }
  const data::DatasetMeta meta = data::read_meta(c.data.root);
  data::TimeSeriesDataset all;
  bool first = true;
  for (auto& [split, n] : meta.splits) {
    data::TimeSeriesDataset part = data::read_raw_split(c.data.root, split);
    if (first) {
      all = std::move(part);
      first = false;
      continue;
    }
    const long n0 = all.n(), n1 = part.n(), ct = all.channels() * all.length();
    Tensor<float> merged({n0 + n1, all.channels(), all.length()});
    std::copy(all.samples.data(), all.samples.data() + n0 * ct, merged.data());
    std::copy(part.samples.data(), part.samples.data() + n1 * ct, merged.data() + n0 * ct);
    all.samples = std::move(merged);
    all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
  }
  all.origin_split.clear();
  data::SplitSpec spec;
  spec.train_frac = c.data.train_frac;
  spec.val_frac = c.data.val_frac;
  spec.test_frac = c.data.test_frac;
  spec.seed = rng::mix(c.seed, "resplit");
  data::split_dataset(all, spec, out.train, out.val, out.test);
  const data::ChannelStats st = data::channel_stats(out.train);
  for (data::TimeSeriesDataset* ds : {&out.train, &out.val, &out.test})
    for (long ci = 0; ci < ds->channels(); ++ci) {
      const auto mean = static_cast<float>(st.mean[static_cast<std::size_t>(ci)]);
      const auto inv = static_cast<float>(1.0 / st.stddev[static_cast<std::size_t>(ci)]);
      for (long b = 0; b < ds->n(); ++b)
        for (long t = 0; t < ds->length(); ++t)
          ds->samples.at3(b, ci, t) = (ds->samples.at3(b, ci, t) - mean) * inv;
    }
  return out;
}

int cmd_pretrain(const CommonArgs& args) {
  cfg::ExperimentConfig c = resolve_config(args);
  LoadedData ds = load_experiment_data(c);
  train::PretrainResult r = train::pretrain(c, ds.train, args.out_dir);
  std::cout << "pretrain: " << r.total_steps << " steps, best checkpoint " << r.best_checkpoint
            << "\n";
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& ckpt_path, bool linear, bool semi,
             double fraction, const std::string& baseline) {
  const int protocols = (linear ? 1 : 0) + (semi ? 1 : 0) + (baseline.empty() ? 0 : 1);
  if (protocols != 1)
    throw ConfigError("eval: pick exactly one of --linear, --semi, --baseline");
  cfg::ExperimentConfig c = resolve_config(args);
  LoadedData ds = load_experiment_data(c);

  eval::EvalReport report;
  if (!baseline.empty()) {
    if (baseline == "supervised")
      report = eval::run_supervised_baseline(c, ds.train, ds.test, c.seed);
    else if (baseline == "random")
      report = eval::run_random_init_baseline(c, ds.train, ds.test, c.seed);
    else
      throw ConfigError("eval: --baseline must be 'supervised' or 'random'");
  } else {
    if (ckpt_path.empty()) throw ConfigError("eval: --ckpt is required with --linear/--semi");
    ckpt::Checkpoint loaded = ckpt::load_checkpoint(ckpt_path);
    net::DualNetworkState<float> state = ckpt::restore_network(loaded);
    if (linear)
      report = eval::linear_evaluate(state, ds.train, ds.test, c, c.seed);
    else
      report = eval::finetune_semisupervised(state, ds.train, ds.test, fraction, c, c.seed);
  }
  fs::create_directories(args.out_dir);
  {
    std::ofstream out(fs::path(args.out_dir) / "report.json");
    out << report.to_json(2) << "\n";
  }
  eval::append_report(args.out_dir, report);
  std::cout << "eval: " << report.protocol << " accuracy=" << report.accuracy
            << " macro_f1=" << report.macro_f1 << "\n";
  return 0;
}

int cmd_ablate(const CommonArgs& args, const std::string& axis) {
  cfg::ExperimentConfig base = resolve_config(args);
  LoadedData ds = load_experiment_data(base);

  struct Variant {
    std::string name;
    cfg::ExperimentConfig config;
  };
  std::vector<Variant> grid;
  if (axis == "heads") {
    Variant full{"full", base};
    Variant no_mlp{"no_mlp_head", base};
    no_mlp.config.model.use_mlp_head = false;
    Variant no_tcn{"no_tcn_head", base};  // the plain-bootstrap reduction
    no_tcn.config.model.use_tcn_head = false;
    grid = {full, no_mlp, no_tcn};
  } else if (axis == "augmentation") {
    Variant same{"same_family", base};
    same.config.augmentation.family = aug::Family::jitter_permute_rotate;
    Variant diff{"different_family", base};
    diff.config.augmentation.family = aug::Family::jitter_scale;
    grid = {same, diff};
  } else if (axis == "ordering") {
    // Winning ordering: head kernel below every encoder kernel, dilations
    // above the head kernel. Inverted ordering: head kernel above the
    // smallest encoder kernel, dilations below it.
    Variant win{"k_lt_enc_d_gt_k", base};
    Variant inv{"k_gt_enc_d_lt_k", base};
    const long enc_min = *std::min_element(base.model.encoder.kernel_sizes.begin(),
                                           base.model.encoder.kernel_sizes.end());
    inv.config.model.tcn.kernel = enc_min + 4;
    inv.config.model.tcn.dilations.clear();
    for (long i = 0; i < inv.config.model.tcn.layers; ++i)
      inv.config.model.tcn.dilations.push_back(i + 1);
    grid = {win, inv};
  } else if (axis == "lambda") {
    for (double l : {0.005, 0.5, 5.0, 500.0}) {
      char name[32];
      std::snprintf(name, sizeof name, "lambda_%g", l);
      Variant v{name, base};
      v.config.train.lambda = l;
      grid.push_back(v);
    }
  } else {
    throw ConfigError("ablate: --axis must be heads|augmentation|ordering|lambda");
  }

  fs::create_directories(args.out_dir);
  std::ofstream table(fs::path(args.out_dir) / ("ablation_" + axis + ".csv"), std::ios::trunc);
  if (!table) throw DataError("ablate: cannot write ablation table under " + args.out_dir);
  table << "variant,seed,accuracy,macro_f1\n";
  for (const Variant& v : grid) {
    const std::string run_dir = (fs::path(args.out_dir) / v.name).string();
    train::PretrainResult r = train::pretrain(v.config, ds.train, run_dir);
    ckpt::Checkpoint loaded = ckpt::load_checkpoint(r.best_checkpoint);
    net::DualNetworkState<float> state = ckpt::restore_network(loaded);
    eval::EvalReport report = eval::linear_evaluate(state, ds.train, ds.test, v.config,
                                                    v.config.seed);
    char row[160];
    std::snprintf(row, sizeof row, "%s,%llu,%.6f,%.6f\n", v.name.c_str(),
                  static_cast<unsigned long long>(v.config.seed), report.accuracy,
                  report.macro_f1);
    table << row;
    table.flush();
    std::cout << "ablate " << axis << ": " << v.name << " macro_f1=" << report.macro_f1 << "\n";
  }
  return 0;
}

int cmd_synth_gen(const CommonArgs& args, data::SyntheticSpec spec, double train_frac,
                  double val_frac, double test_frac) {
  const std::uint64_t seed = args.seed >= 0 ? static_cast<std::uint64_t>(args.seed) : 1234;
  data::TimeSeriesDataset all = data::generate_synthetic(spec, seed);
  data::SplitSpec split;
  split.train_frac = train_frac;
  split.val_frac = val_frac;
  split.test_frac = test_frac;
  split.seed = rng::mix(seed, "synth-split");
  data::TimeSeriesDataset train, val, test;
  data::split_dataset(all, split, train, val, test);
  data::save_dataset(args.out_dir, "synthetic",
                     {{"train", train}, {"val", val}, {"test", test}});
  std::cout << "synth-gen: wrote " << all.n() << " samples (" << train.n() << "/" << val.n()
            << "/" << test.n() << " train/val/test) to " << args.out_dir << "\n";
  return 0;
}

int cmd_export_embeddings(const CommonArgs& args, const std::string& ckpt_path,
                          const std::string& split, const std::string& out_file) {
  if (args.data_root.empty()) throw ConfigError("export-embeddings: --data is required");
  ckpt::Checkpoint loaded = ckpt::load_checkpoint(ckpt_path);
  net::DualNetworkState<float> state = ckpt::restore_network(loaded);
  data::TimeSeriesDataset ds = data::load_dataset(args.data_root, split);
  eval::export_embeddings(state, ds, out_file);
  std::cout << "export-embeddings: wrote " << ds.n() << " rows to " << out_file << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("FREQBOOT_NUM_THREADS"))
    kernels::set_threads(std::atoi(threads));

  CLI::App app{"dual-branch self-supervised time-series pretraining"};
  app.require_subcommand(1);

  CommonArgs pre_args;
  auto* pre = app.add_subcommand("pretrain", "self-supervised pretraining run");
  add_common(pre, pre_args, true, false, true);

  CommonArgs eval_args;
  std::string eval_ckpt, eval_baseline;
  bool eval_linear = false, eval_semi = false;
  double eval_fraction = 0.1;
  auto* ev = app.add_subcommand("eval", "downstream evaluation of a checkpoint");
  add_common(ev, eval_args, true, false, true);
  ev->add_option("--ckpt", eval_ckpt, "checkpoint file");
  ev->add_flag("--linear", eval_linear, "linear probe on the frozen encoder");
  ev->add_flag("--semi", eval_semi, "semi-supervised fine-tuning");
  ev->add_option("--fraction", eval_fraction, "label fraction for --semi");
  ev->add_option("--baseline", eval_baseline, "baseline protocol: supervised|random");

  CommonArgs abl_args;
  std::string abl_axis;
  auto* ab = app.add_subcommand("ablate", "run an ablation grid");
  add_common(ab, abl_args, true, false, true);
  ab->add_option("--axis", abl_axis, "heads|augmentation|ordering|lambda")->required();

  CommonArgs synth_args;
  data::SyntheticSpec synth_spec;
  double synth_train = 0.6, synth_val = 0.2, synth_test = 0.2;
  auto* sg = app.add_subcommand("synth-gen", "generate the synthetic dataset");
  add_common(sg, synth_args, false, false, true);
  sg->add_option("--n-per-class", synth_spec.n_per_class, "samples per class");
  sg->add_option("--channels", synth_spec.channels, "channels");
  sg->add_option("--length", synth_spec.length, "window length");
  sg->add_option("--noise-sigma", synth_spec.noise_sigma, "additive noise std");
  sg->add_option("--low-freqs", synth_spec.low_freq_classes,
                 "low-frequency class frequencies (cycles/window)");
  sg->add_option("--high-freqs", synth_spec.high_freq_classes,
                 "high-frequency class frequencies (cycles/window)");
  sg->add_option("--train-frac", synth_train, "train fraction");
  sg->add_option("--val-frac", synth_val, "val fraction");
  sg->add_option("--test-frac", synth_test, "test fraction");

  CommonArgs exp_args;
  std::string exp_ckpt, exp_split = "test", exp_out_file;
  auto* ex = app.add_subcommand("export-embeddings", "dump frozen representations as CSV");
  add_common(ex, exp_args, false, true, false);
  ex->add_option("--ckpt", exp_ckpt, "checkpoint file")->required();
  ex->add_option("--split", exp_split, "dataset split (default test)");
  ex->add_option("--out-file", exp_out_file, "destination CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (pre->parsed()) return cmd_pretrain(pre_args);
    if (ev->parsed())
      return cmd_eval(eval_args, eval_ckpt, eval_linear, eval_semi, eval_fraction, eval_baseline);
    if (ab->parsed()) return cmd_ablate(abl_args, abl_axis);
    if (sg->parsed()) return cmd_synth_gen(synth_args, synth_spec, synth_train, synth_val,
                                           synth_test);
    if (ex->parsed()) return cmd_export_embeddings(exp_args, exp_ckpt, exp_split, exp_out_file);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 3;
  } catch (const StateError& e) {
    std::cerr << "internal state error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
