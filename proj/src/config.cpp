#include "freqboot/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

using nlohmann::json;

namespace freqboot::cfg {

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) throw ConfigError("config: unknown key '" + key + "' in " + where);
  }
}

template <class T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config: bad value for '" + std::string(key) + "': " + e.what());
    }
  }
}

void parse_encoder(const json& j, net::EncoderConfig& e) {
  reject_unknown(j, {"blocks", "kernel_sizes", "channels", "pool_size", "pool_stride", "dropout"},
                 "model.encoder");
  get_if(j, "blocks", e.blocks);
  get_if(j, "kernel_sizes", e.kernel_sizes);
  get_if(j, "channels", e.channels);
  get_if(j, "pool_size", e.pool_size);
  get_if(j, "pool_stride", e.pool_stride);
  get_if(j, "dropout", e.dropout);
}

void parse_tcn(const json& j, net::TCNHeadConfig& t) {
  reject_unknown(j, {"layers", "kernel", "dilations", "hidden_dim", "out_dim"}, "model.tcn_head");
  get_if(j, "layers", t.layers);
  get_if(j, "kernel", t.kernel);
  get_if(j, "dilations", t.dilations);
  get_if(j, "hidden_dim", t.hidden_dim);
  get_if(j, "out_dim", t.out_dim);
}

void parse_mlp(const json& j, net::MLPHeadConfig& m) {
  reject_unknown(j, {"hidden_dim", "out_dim"}, "model.mlp_head");
  get_if(j, "hidden_dim", m.hidden_dim);
  get_if(j, "out_dim", m.out_dim);
}

void parse_model(const json& j, net::ModelConfig& m) {
  reject_unknown(j,
                 {"encoder", "tcn_head", "mlp_head", "use_tcn_head", "use_mlp_head",
                  "symmetrize_loss", "tau"},
                 "model");
  if (j.contains("encoder")) parse_encoder(j.at("encoder"), m.encoder);
  if (j.contains("tcn_head")) parse_tcn(j.at("tcn_head"), m.tcn);
  if (j.contains("mlp_head")) parse_mlp(j.at("mlp_head"), m.mlp);
  get_if(j, "use_tcn_head", m.use_tcn_head);
  get_if(j, "use_mlp_head", m.use_mlp_head);
  get_if(j, "symmetrize_loss", m.symmetrize_loss);
  get_if(j, "tau", m.tau);
}

void parse_augmentation(const json& j, aug::AugmentationConfig& a) {
  reject_unknown(
      j, {"family", "jitter_sigma", "max_segments", "rotation_deg_online", "rotation_deg_target"},
      "augmentation");
  if (j.contains("family")) a.family = aug::family_from_name(j.at("family").get<std::string>());
  get_if(j, "jitter_sigma", a.jitter_sigma);
  get_if(j, "max_segments", a.max_segments);
  get_if(j, "rotation_deg_online", a.rotation_deg_online);
  get_if(j, "rotation_deg_target", a.rotation_deg_target);
}

void parse_train(const json& j, TrainSection& t) {
  reject_unknown(j,
                 {"epochs", "batch_size", "lr", "weight_decay", "beta1", "beta2", "lambda",
                  "downstream_epochs", "downstream_batch_size", "downstream_lr"},
                 "train");
  get_if(j, "epochs", t.epochs);
  get_if(j, "batch_size", t.batch_size);
  get_if(j, "lr", t.lr);
  get_if(j, "weight_decay", t.weight_decay);
  get_if(j, "beta1", t.beta1);
  get_if(j, "beta2", t.beta2);
  get_if(j, "lambda", t.lambda);
  get_if(j, "downstream_epochs", t.downstream_epochs);
  get_if(j, "downstream_batch_size", t.downstream_batch_size);
  get_if(j, "downstream_lr", t.downstream_lr);
}

void parse_data(const json& j, DataConfig& d) {
  reject_unknown(j, {"root", "resplit", "train_frac", "val_frac", "test_frac"}, "data");
  get_if(j, "root", d.root);
  get_if(j, "resplit", d.resplit);
  get_if(j, "train_frac", d.train_frac);
  get_if(j, "val_frac", d.val_frac);
  get_if(j, "test_frac", d.test_frac);
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("config: invalid JSON: " + std::string(e.what()));
  }
  ExperimentConfig cfg;
  reject_unknown(j, {"seed", "strict_determinism", "data", "model", "augmentation", "train"},
                 "top level");
  get_if(j, "seed", cfg.seed);
  get_if(j, "strict_determinism", cfg.strict_determinism);
  if (j.contains("data")) parse_data(j.at("data"), cfg.data);
  if (j.contains("model")) parse_model(j.at("model"), cfg.model);
  if (j.contains("augmentation")) parse_augmentation(j.at("augmentation"), cfg.augmentation);
  if (j.contains("train")) parse_train(j.at("train"), cfg.train);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& cfg, int indent) {
  json j;
  j["seed"] = cfg.seed;
  j["strict_determinism"] = cfg.strict_determinism;
  j["data"] = {{"root", cfg.data.root},
               {"resplit", cfg.data.resplit},
               {"train_frac", cfg.data.train_frac},
               {"val_frac", cfg.data.val_frac},
               {"test_frac", cfg.data.test_frac}};
  j["model"] = {
      {"encoder",
       {{"blocks", cfg.model.encoder.blocks},
        {"kernel_sizes", cfg.model.encoder.kernel_sizes},
        {"channels", cfg.model.encoder.channels},
        {"pool_size", cfg.model.encoder.pool_size},
        {"pool_stride", cfg.model.encoder.pool_stride},
        {"dropout", cfg.model.encoder.dropout}}},
      {"tcn_head",
       {{"layers", cfg.model.tcn.layers},
        {"kernel", cfg.model.tcn.kernel},
        {"dilations", cfg.model.tcn.dilations},
        {"hidden_dim", cfg.model.tcn.hidden_dim},
        {"out_dim", cfg.model.tcn.out_dim}}},
      {"mlp_head", {{"hidden_dim", cfg.model.mlp.hidden_dim}, {"out_dim", cfg.model.mlp.out_dim}}},
      {"use_tcn_head", cfg.model.use_tcn_head},
      {"use_mlp_head", cfg.model.use_mlp_head},
      {"symmetrize_loss", cfg.model.symmetrize_loss},
      {"tau", cfg.model.tau}};
  j["augmentation"] = {{"family", aug::family_name(cfg.augmentation.family)},
                       {"jitter_sigma", cfg.augmentation.jitter_sigma},
                       {"max_segments", cfg.augmentation.max_segments},
                       {"rotation_deg_online", cfg.augmentation.rotation_deg_online},
                       {"rotation_deg_target", cfg.augmentation.rotation_deg_target}};
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"lr", cfg.train.lr},
                {"weight_decay", cfg.train.weight_decay},
                {"beta1", cfg.train.beta1},
                {"beta2", cfg.train.beta2},
                {"lambda", cfg.train.lambda},
                {"downstream_epochs", cfg.train.downstream_epochs},
                {"downstream_batch_size", cfg.train.downstream_batch_size},
                {"downstream_lr", cfg.train.downstream_lr}};
  return indent < 0 ? j.dump() : j.dump(indent);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::uint64_t h = rng::fnv1a(to_json(cfg));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace freqboot::cfg
