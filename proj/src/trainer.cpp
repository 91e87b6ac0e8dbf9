#include "freqboot/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include "freqboot/augmentations.hpp"

namespace fs = std::filesystem;

namespace freqboot::train {

namespace {

double tensor_norm(const Tensor<float>& t) {
  double s = 0.0;
  const float* p = t.data();
  for (long i = 0; i < t.size(); ++i) s += static_cast<double>(p[i]) * p[i];
  return std::sqrt(s);
}

struct DirectionLosses {
  double lfb = 0.0;
  double hfb = 0.0;
};

// Forward both branches for one (online view, target view) direction,
// accumulate gradients scaled by `grad_scale`, and return the branch losses.
DirectionLosses run_direction(const Tensor<float>& x_online, const Tensor<float>& x_target,
                              net::DualNetworkState<float>& state,
                              const cfg::ExperimentConfig& cfg, rng::Stream& drop_rng,
                              double grad_scale) {
  const bool use_tcn = cfg.model.use_tcn_head;
  const bool use_mlp = cfg.model.use_mlp_head;
  // Single-head ablations train that branch at weight 1 so the loss scale is
  // comparable with the full model.
  const double w_lfb = use_mlp ? cfg.train.lambda : 1.0;
  const double w_hfb = use_tcn ? 1.0 - cfg.train.lambda : 1.0;

  net::HeadOutputs<float> on = state.forward_online(x_online, /*training=*/true, &drop_rng);
  net::HeadOutputs<float> tg = state.forward_target(x_target);

  DirectionLosses losses;
  if (use_tcn) losses.lfb = objective::normalized_regression_loss(on.tcn_pred, tg.tcn_proj);
  if (use_mlp) losses.hfb = objective::normalized_regression_loss(on.mlp_pred, tg.mlp_proj);

  const double total = (use_tcn ? w_lfb * losses.lfb : 0.0) + (use_mlp ? w_hfb * losses.hfb : 0.0);
  if (!std::isfinite(total)) {
    std::string snapshot = "non-finite loss: l_lfb=" + std::to_string(losses.lfb) +
                           " l_hfb=" + std::to_string(losses.hfb);
    if (use_tcn)
      snapshot += " |q_tcn|=" + std::to_string(tensor_norm(on.tcn_pred)) +
                  " |g_tcn|=" + std::to_string(tensor_norm(tg.tcn_proj));
    if (use_mlp)
      snapshot += " |q_mlp|=" + std::to_string(tensor_norm(on.mlp_pred)) +
                  " |g_mlp|=" + std::to_string(tensor_norm(tg.mlp_proj));
    throw DivergenceError(snapshot);
  }

  Tensor<float> d_tcn, d_mlp;
  if (use_tcn)
    d_tcn = objective::normalized_regression_loss_backward(on.tcn_pred, tg.tcn_proj,
                                                           grad_scale * w_lfb);
  if (use_mlp)
    d_mlp = objective::normalized_regression_loss_backward(on.mlp_pred, tg.mlp_proj,
                                                           grad_scale * w_hfb);
  state.backward_online(d_tcn, d_mlp, x_online.dim(0));
  return losses;
}

}  // namespace

objective::LossBreakdown train_step(const Tensor<float>& batch,
                                    net::DualNetworkState<float>& state, opt::AdamW<float>& optim,
                                    const cfg::ExperimentConfig& cfg, std::uint64_t step_seed,
                                    StepCounters* counters) {
  if (batch.dim(0) < 2) throw StateError("train_step: batch size must be >= 2");

  aug::ViewPair<float> vp = aug::make_view_pair(batch, cfg.augmentation, step_seed);
  rng::Stream drop_rng(rng::mix(step_seed, "dropout"));

  state.zero_grad();
  objective::LossBreakdown out;
  if (!cfg.model.symmetrize_loss) {
    DirectionLosses l = run_direction(vp.view_online, vp.view_target, state, cfg, drop_rng, 1.0);
    out.lfb = l.lfb;
    out.hfb = l.hfb;
  } else {
    // Optional BYOL-style symmetrization: average the swapped direction.
    DirectionLosses a = run_direction(vp.view_online, vp.view_target, state, cfg, drop_rng, 0.5);
    DirectionLosses b = run_direction(vp.view_target, vp.view_online, state, cfg, drop_rng, 0.5);
    out.lfb = 0.5 * (a.lfb + b.lfb);
    out.hfb = 0.5 * (a.hfb + b.hfb);
  }
  const bool use_tcn = cfg.model.use_tcn_head, use_mlp = cfg.model.use_mlp_head;
  const double w_lfb = use_mlp ? cfg.train.lambda : 1.0;
  const double w_hfb = use_tcn ? 1.0 - cfg.train.lambda : 1.0;
  out.total = (use_tcn ? w_lfb * out.lfb : 0.0) + (use_mlp ? w_hfb * out.hfb : 0.0);

  optim.step();
  state.ema_update();
  if (counters) {
    counters->optimizer_steps += 1;
    counters->ema_updates += 1;
  }
  return out;
}

Tensor<float> gather_batch(const data::TimeSeriesDataset& ds, const std::vector<long>& order,
                           long first, long count) {
  const long c = ds.channels(), t = ds.length();
  Tensor<float> batch({count, c, t});
  for (long i = 0; i < count; ++i) {
    const long src = order[static_cast<std::size_t>(first + i)];
    std::memcpy(&batch.at3(i, 0, 0), &ds.samples.at3(src, 0, 0),
                static_cast<std::size_t>(c * t) * sizeof(float));
  }
  return batch;
}

PretrainResult pretrain(const cfg::ExperimentConfig& cfg, const data::TimeSeriesDataset& train_ds,
                        const std::string& out_dir) {
  cfg.validate();
  train_ds.validate();
  if (train_ds.origin_split != "train")
    throw StateError("pretrain consumes the train split only; got dataset tagged '" +
                     train_ds.origin_split + "'");
  const long n = train_ds.n();
  if (n < 2) throw ConfigError("pretrain: need at least 2 training samples");

  fs::create_directories(out_dir);
  std::ofstream log(fs::path(out_dir) / "train_log.csv", std::ios::trunc);
  if (!log) throw DataError("pretrain: cannot write train_log.csv under " + out_dir);
  log << "epoch,step,l_lfb,l_hfb,l_total,wallclock_s\n";

  net::DualNetworkState<float> state(cfg.model, train_ds.channels(), train_ds.length(), cfg.seed);
  opt::AdamWConfig ocfg;
  ocfg.lr = cfg.train.lr;
  ocfg.weight_decay = cfg.train.weight_decay;
  ocfg.beta1 = cfg.train.beta1;
  ocfg.beta2 = cfg.train.beta2;
  opt::AdamW<float> optim(ocfg, state.trainable_params());

  PretrainResult result;
  const auto t0 = std::chrono::steady_clock::now();
  double best_loss = std::numeric_limits<double>::infinity();
  long global_step = 0;

  std::vector<long> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0L);

  for (long epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    {
      rng::Stream rs(rng::mix(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
      for (long i = n - 1; i > 0; --i) {
        const long j = rs.uniform_int(0, i);
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
      }
    }
    double epoch_sum = 0.0;
    long epoch_steps = 0;
    for (long first = 0; first < n; first += cfg.train.batch_size) {
      const long count = std::min(cfg.train.batch_size, n - first);
      if (count < 2) break;  // a trailing batch of one sample cannot be batch-normed
      Tensor<float> batch = gather_batch(train_ds, order, first, count);
      const std::uint64_t step_seed = rng::mix(cfg.seed, "step", static_cast<std::uint64_t>(epoch),
                                               static_cast<std::uint64_t>(global_step));
      objective::LossBreakdown l = train_step(batch, state, optim, cfg, step_seed,
                                              &result.counters);
      ++global_step;
      ++epoch_steps;
      epoch_sum += l.total;
      const double wall =
          cfg.strict_determinism
              ? 0.0
              : std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      char row[160];
      std::snprintf(row, sizeof row, "%ld,%ld,%.9g,%.9g,%.9g,%.3f\n", epoch, global_step, l.lfb,
                    l.hfb, l.total, wall);
      log << row;
    }
    log.flush();
    const double epoch_mean = epoch_steps > 0 ? epoch_sum / static_cast<double>(epoch_steps)
                                              : std::numeric_limits<double>::infinity();
    result.epoch_mean_loss.push_back(epoch_mean);

    char name[32];
    std::snprintf(name, sizeof name, "epoch_%04ld.ckpt", epoch);
    const std::string epoch_path = (fs::path(out_dir) / name).string();
    ckpt::save_checkpoint(epoch_path, state, cfg, epoch, global_step, train_ds.channels(),
                          train_ds.length());
    result.last_checkpoint = epoch_path;
    if (epoch_mean < best_loss) {
      best_loss = epoch_mean;
      const std::string best_path = (fs::path(out_dir) / "best.ckpt").string();
      ckpt::save_checkpoint(best_path, state, cfg, epoch, global_step, train_ds.channels(),
                            train_ds.length());
      result.best_checkpoint = best_path;
    }
  }
  result.total_steps = global_step;
  return result;
}

}  // namespace freqboot::train
