#include "freqboot/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "freqboot/optimizer.hpp"
#include "freqboot/trainer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace freqboot::eval {

Metrics compute_metrics(const std::vector<long>& preds, const std::vector<std::int64_t>& labels,
                        long num_classes) {
  if (preds.empty() || preds.size() != labels.size())
    throw StateError("compute_metrics: need equal-length non-empty predictions and labels");
  std::vector<long> tp(static_cast<std::size_t>(num_classes), 0);
  std::vector<long> fp(static_cast<std::size_t>(num_classes), 0);
  std::vector<long> fn(static_cast<std::size_t>(num_classes), 0);
  long correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const long p = preds[i];
    const long y = static_cast<long>(labels[i]);
    if (p < 0 || p >= num_classes || y < 0 || y >= num_classes)
      throw StateError("compute_metrics: class id outside [0, num_classes)");
    if (p == y) {
      ++correct;
      ++tp[static_cast<std::size_t>(p)];
    } else {
      ++fp[static_cast<std::size_t>(p)];
      ++fn[static_cast<std::size_t>(y)];
    }
  }
  Metrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(preds.size());
  m.per_class_f1.resize(static_cast<std::size_t>(num_classes), 0.0);
  double sum = 0.0;
  for (long c = 0; c < num_classes; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    const double denom = static_cast<double>(2 * tp[ci] + fp[ci] + fn[ci]);
    const double f1 = denom > 0.0 ? 2.0 * static_cast<double>(tp[ci]) / denom : 0.0;
    m.per_class_f1[ci] = f1;
    sum += f1;
  }
  m.macro_f1 = sum / static_cast<double>(num_classes);
  return m;
}

std::string EvalReport::to_json(int indent) const {
  json j;
  j["protocol"] = protocol;
  j["accuracy"] = accuracy;
  j["macro_f1"] = macro_f1;
  j["per_class_f1"] = per_class_f1;
  j["label_fraction"] = label_fraction;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["warnings"] = warnings;
  return indent < 0 ? j.dump() : j.dump(indent);
}

Tensor<float> embed(net::DualNetworkState<float>& state, const data::TimeSeriesDataset& ds,
                    long batch_size) {
  net::Encoder<float>& enc = state.online().encoder();
  const long n = ds.n(), d = enc.flat_dim();
  Tensor<float> out({n, d});
  std::vector<long> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0L);
  for (long first = 0; first < n; first += batch_size) {
    const long count = std::min(batch_size, n - first);
    Tensor<float> batch = train::gather_batch(ds, order, first, count);
    Tensor<float> z = enc.forward(batch, /*training=*/false, /*update_running=*/false, nullptr);
    std::memcpy(&out.at2(first, 0), z.data(), static_cast<std::size_t>(z.size()) * sizeof(float));
  }
  return out;
}

namespace {

// softmax cross-entropy on logits [B,k]; dlogits = (softmax - onehot) / B
double softmax_ce(const Tensor<float>& logits, const std::vector<std::int64_t>& labels,
                  long first, Tensor<float>* dlogits) {
  const long b = logits.dim(0), k = logits.dim(1);
  double loss = 0.0;
  for (long i = 0; i < b; ++i) {
    double mx = logits.at2(i, 0);
    for (long c = 1; c < k; ++c) mx = std::max(mx, static_cast<double>(logits.at2(i, c)));
    double z = 0.0;
    for (long c = 0; c < k; ++c) z += std::exp(static_cast<double>(logits.at2(i, c)) - mx);
    const long y = static_cast<long>(labels[static_cast<std::size_t>(first + i)]);
    loss += -(static_cast<double>(logits.at2(i, y)) - mx - std::log(z));
    if (dlogits)
      for (long c = 0; c < k; ++c) {
        const double p = std::exp(static_cast<double>(logits.at2(i, c)) - mx) / z;
        dlogits->at2(i, c) =
            static_cast<float>((p - (c == y ? 1.0 : 0.0)) / static_cast<double>(b));
      }
  }
  return loss / static_cast<double>(b);
}

std::vector<long> argmax_rows(const Tensor<float>& logits) {
  const long b = logits.dim(0), k = logits.dim(1);
  std::vector<long> out(static_cast<std::size_t>(b));
  for (long i = 0; i < b; ++i) {
    long best = 0;
    for (long c = 1; c < k; ++c)
      if (logits.at2(i, c) > logits.at2(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

void check_all_classes_present(const data::TimeSeriesDataset& ds) {
  std::set<std::int64_t> seen(ds.labels.begin(), ds.labels.end());
  for (long c = 0; c < ds.num_classes; ++c)
    if (!seen.count(c))
      throw ConfigError("evaluation: class " + std::to_string(c) +
                        " absent from the training labels");
}

opt::AdamWConfig downstream_opt(const cfg::ExperimentConfig& cfg) {
  opt::AdamWConfig o;
  o.lr = cfg.train.downstream_lr;
  o.weight_decay = cfg.train.weight_decay;
  o.beta1 = cfg.train.beta1;
  o.beta2 = cfg.train.beta2;
  return o;
}

/// Linear classifier trained on fixed feature rows [n,d].
net::Linear<float> fit_linear_probe(const Tensor<float>& feats,
                                    const std::vector<std::int64_t>& labels, long num_classes,
                                    const cfg::ExperimentConfig& cfg, std::uint64_t seed) {
  const long n = feats.dim(0), d = feats.dim(1);
  rng::Stream init(rng::mix(seed, "probe-init"));
  net::Linear<float> clf("classifier", d, num_classes, init);
  net::ParamRefs<float> params;
  clf.collect(params);
  opt::AdamW<float> optim(downstream_opt(cfg), params);

  std::vector<long> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0L);
  const long bs = std::min<long>(cfg.train.downstream_batch_size, n);
  for (long epoch = 1; epoch <= cfg.train.downstream_epochs; ++epoch) {
    rng::Stream rs(rng::mix(seed, "probe-shuffle", static_cast<std::uint64_t>(epoch)));
    for (long i = n - 1; i > 0; --i) {
      const long j = rs.uniform_int(0, i);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    for (long first = 0; first < n; first += bs) {
      const long count = std::min(bs, n - first);
      Tensor<float> xb({count, d});
      std::vector<std::int64_t> yb(static_cast<std::size_t>(count));
      for (long i = 0; i < count; ++i) {
        const long src = order[static_cast<std::size_t>(first + i)];
        std::memcpy(&xb.at2(i, 0), &feats.at2(src, 0), static_cast<std::size_t>(d) * sizeof(float));
        yb[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(src)];
      }
      for (auto& p : params) p.grad->zero();
      Tensor<float> logits = clf.forward(xb, /*training=*/true);
      Tensor<float> dlogits({count, num_classes});
      softmax_ce(logits, yb, 0, &dlogits);
      clf.backward(dlogits);
      optim.step();
    }
  }
  return clf;
}

Metrics probe_metrics(net::Linear<float>& clf, const Tensor<float>& feats,
                      const std::vector<std::int64_t>& labels, long num_classes) {
  Tensor<float> logits = clf.forward(feats, /*training=*/false);
  return compute_metrics(argmax_rows(logits), labels, num_classes);
}

EvalReport make_report(const std::string& protocol, const Metrics& m, double fraction,
                       std::uint64_t seed, const cfg::ExperimentConfig& cfg) {
  EvalReport r;
  r.protocol = protocol;
  r.accuracy = m.accuracy;
  r.macro_f1 = m.macro_f1;
  r.per_class_f1 = m.per_class_f1;
  r.label_fraction = fraction;
  r.seed = seed;
  r.config_hash = cfg::config_hash(cfg);
  r.warnings = WarningLog::drain();
  return r;
}

/// Fine-tune the full online encoder plus a fresh linear classifier on the
/// given labeled set; returns test metrics.
Metrics finetune_and_score(net::DualNetworkState<float>& state,
                           const data::TimeSeriesDataset& labeled,
                           const data::TimeSeriesDataset& test_ds,
                           const cfg::ExperimentConfig& cfg, std::uint64_t seed) {
  check_all_classes_present(labeled);
  net::Encoder<float>& enc = state.online().encoder();
  const long n = labeled.n(), d = enc.flat_dim(), k = labeled.num_classes;

  rng::Stream init(rng::mix(seed, "finetune-init"));
  net::Linear<float> clf("classifier", d, k, init);
  net::ParamRefs<float> params;
  clf.collect(params);
  {
    net::ParamRefs<float> enc_params;
    net::BufferRefs<float> enc_buffers;
    enc.collect("encoder.", enc_params, enc_buffers);
    for (auto& p : enc_params) params.push_back(p);
  }
  opt::AdamW<float> optim(downstream_opt(cfg), params);

  std::vector<long> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0L);
  const long bs = std::min<long>(cfg.train.downstream_batch_size, n);
  for (long epoch = 1; epoch <= cfg.train.downstream_epochs; ++epoch) {
    rng::Stream rs(rng::mix(seed, "finetune-shuffle", static_cast<std::uint64_t>(epoch)));
    for (long i = n - 1; i > 0; --i) {
      const long j = rs.uniform_int(0, i);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    long step = 0;
    for (long first = 0; first < n; first += bs, ++step) {
      const long count = std::min(bs, n - first);
      if (count < 2) break;  // batch norm cannot run on a single sample
      Tensor<float> xb = train::gather_batch(labeled, order, first, count);
      std::vector<std::int64_t> yb(static_cast<std::size_t>(count));
      for (long i = 0; i < count; ++i)
        yb[static_cast<std::size_t>(i)] =
            labeled.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(first + i)])];

      rng::Stream drop(rng::mix(seed, "finetune-dropout", static_cast<std::uint64_t>(epoch),
                                static_cast<std::uint64_t>(step)));
      for (auto& p : params) p.grad->zero();
      Tensor<float> z = enc.forward(xb, /*training=*/true, /*update_running=*/true, &drop);
      Tensor<float> flat = z.reshaped({count, d});
      Tensor<float> logits = clf.forward(flat, /*training=*/true);
      Tensor<float> dlogits({count, k});
      softmax_ce(logits, yb, 0, &dlogits);
      Tensor<float> dflat = clf.backward(dlogits);
      enc.backward(dflat.reshaped({count, enc.out_channels(), enc.out_len()}));
      optim.step();
    }
  }

  Tensor<float> test_feats = embed(state, test_ds);
  return probe_metrics(clf, test_feats, test_ds.labels, k);
}

}  // namespace

EvalReport linear_evaluate(net::DualNetworkState<float>& state,
                           const data::TimeSeriesDataset& train_ds,
                           const data::TimeSeriesDataset& test_ds,
                           const cfg::ExperimentConfig& cfg, std::uint64_t seed) {
  check_all_classes_present(train_ds);
  Tensor<float> train_feats = embed(state, train_ds);
  Tensor<float> test_feats = embed(state, test_ds);
  net::Linear<float> clf =
      fit_linear_probe(train_feats, train_ds.labels, train_ds.num_classes, cfg, seed);
  Metrics m = probe_metrics(clf, test_feats, test_ds.labels, train_ds.num_classes);
  return make_report("linear", m, 1.0, seed, cfg);
}

EvalReport finetune_semisupervised(net::DualNetworkState<float>& state,
                                   const data::TimeSeriesDataset& train_ds,
                                   const data::TimeSeriesDataset& test_ds, double fraction,
                                   const cfg::ExperimentConfig& cfg, std::uint64_t seed) {
  data::TimeSeriesDataset sub =
      data::subsample_labels(train_ds, fraction, rng::mix(seed, "label-subsample"));
  Metrics m = finetune_and_score(state, sub, test_ds, cfg, seed);
  EvalReport r = make_report("semisup", m, fraction, seed, cfg);
  return r;
}

EvalReport run_supervised_baseline(const cfg::ExperimentConfig& cfg,
                                   const data::TimeSeriesDataset& train_ds,
                                   const data::TimeSeriesDataset& test_ds, std::uint64_t seed) {
  net::DualNetworkState<float> state(cfg.model, train_ds.channels(), train_ds.length(), seed);
  Metrics m = finetune_and_score(state, train_ds, test_ds, cfg, seed);
  return make_report("supervised_baseline", m, 1.0, seed, cfg);
}

EvalReport run_random_init_baseline(const cfg::ExperimentConfig& cfg,
                                    const data::TimeSeriesDataset& train_ds,
                                    const data::TimeSeriesDataset& test_ds, std::uint64_t seed) {
  net::DualNetworkState<float> state(cfg.model, train_ds.channels(), train_ds.length(), seed);
  EvalReport r = linear_evaluate(state, train_ds, test_ds, cfg, seed);
  r.protocol = "random_init_baseline";
  return r;
}

void export_embeddings(net::DualNetworkState<float>& state, const data::TimeSeriesDataset& ds,
                       const std::string& out_path) {
  Tensor<float> feats = embed(state, ds);
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw DataError("export_embeddings: cannot write " + out_path);
  const long n = feats.dim(0), d = feats.dim(1);
  out << "index,label";
  for (long j = 0; j < d; ++j) out << ",e_" << j;
  out << "\n";
  char cell[48];
  for (long i = 0; i < n; ++i) {
    out << i << "," << ds.labels[static_cast<std::size_t>(i)];
    for (long j = 0; j < d; ++j) {
      std::snprintf(cell, sizeof cell, ",%.9g", static_cast<double>(feats.at2(i, j)));
      out << cell;
    }
    out << "\n";
  }
}

void append_report(const std::string& out_dir, const EvalReport& report) {
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "reports.jsonl", std::ios::app);
  if (!out) throw DataError("cannot append to reports.jsonl under " + out_dir);
  out << report.to_json(-1) << "\n";
  out.close();
  write_results_table(out_dir);
}

void write_results_table(const std::string& out_dir) {
  std::ifstream in(fs::path(out_dir) / "reports.jsonl");
  if (!in) throw DataError("cannot read reports.jsonl under " + out_dir);
  struct Group {
    std::vector<double> acc, mf1;
  };
  std::map<std::string, Group> groups;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("reports.jsonl holds a malformed line: " + std::string(e.what()));
    }
    std::string method = j.at("protocol").get<std::string>();
    if (method == "semisup") {
      char buf[32];
      std::snprintf(buf, sizeof buf, "@%g", j.at("label_fraction").get<double>());
      method += buf;
    }
    groups[method].acc.push_back(j.at("accuracy").get<double>());
    groups[method].mf1.push_back(j.at("macro_f1").get<double>());
  }
  auto mean_std = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::pair<double, double>(mean, std::sqrt(var / n));
  };
  std::ofstream out(fs::path(out_dir) / "results_table.csv", std::ios::trunc);
  if (!out) throw DataError("cannot write results_table.csv under " + out_dir);
  out << "method,seeds,acc_mean,acc_std,mf1_mean,mf1_std\n";
  char row[192];
  for (auto& [method, g] : groups) {
    const auto [am, as] = mean_std(g.acc);
    const auto [fm, fsd] = mean_std(g.mf1);
    std::snprintf(row, sizeof row, "%s,%zu,%.6f,%.6f,%.6f,%.6f\n", method.c_str(), g.acc.size(),
                  am, as, fm, fsd);
    out << row;
  }
}

}  // namespace freqboot::eval
