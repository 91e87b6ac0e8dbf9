#include "freqboot/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace freqboot::ckpt {

namespace {

constexpr char kMagic[8] = {'F', 'B', 'C', 'K', 'P', 'T', '0', '1'};

struct Entry {
  std::string name;
  std::vector<long> shape;
  std::uint64_t offset;  // in floats, into the payload
};

}  // namespace

void save_checkpoint(const std::string& path, net::DualNetworkState<float>& state,
                     const cfg::ExperimentConfig& config, long epoch, long global_step,
                     long in_channels, long in_len) {
  net::ParamRefs<float> params;
  net::BufferRefs<float> buffers;
  state.collect_state(params, buffers);

  json header;
  header["config"] = json::parse(cfg::to_json(config));
  header["config_hash"] = cfg::config_hash(config);
  header["epoch"] = epoch;
  header["global_step"] = global_step;
  header["rng"] = {{"seed", config.seed}, {"epoch", epoch}, {"global_step", global_step}};
  header["in_channels"] = in_channels;
  header["in_len"] = in_len;

  json entries = json::array();
  std::uint64_t offset = 0;
  std::vector<const Tensor<float>*> payload;
  auto add = [&](const std::string& name, const Tensor<float>* t) {
    entries.push_back({{"name", name}, {"shape", t->shape()}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(t->size());
    payload.push_back(t);
  };
  for (auto& p : params) add(p.name, p.value);
  for (auto& b : buffers) add(b.name, b.value);
  header["tensors"] = std::move(entries);

  const std::string head = header.dump();
  const fs::path final_path(path);
  const fs::path tmp_path = final_path.string() + ".tmp";
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("checkpoint: cannot write " + tmp_path.string());
    out.write(kMagic, sizeof kMagic);
    const std::uint64_t head_len = head.size();
    out.write(reinterpret_cast<const char*>(&head_len), sizeof head_len);
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    for (const Tensor<float>* t : payload)
      out.write(reinterpret_cast<const char*>(t->data()),
                static_cast<std::streamsize>(t->size() * sizeof(float)));
    out.flush();
    if (!out) throw DataError("checkpoint: write failed for " + tmp_path.string());
  }
  std::error_code ec;
  fs::rename(tmp_path, final_path, ec);
  if (ec) {
    fs::remove(tmp_path);
    throw DataError("checkpoint: rename to " + final_path.string() + " failed: " + ec.message());
  }
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw DataError("checkpoint: " + path + " is not a checkpoint archive");
  std::uint64_t head_len = 0;
  in.read(reinterpret_cast<char*>(&head_len), sizeof head_len);
  if (!in) throw DataError("checkpoint: truncated header in " + path);
  std::string head(head_len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head_len));
  if (!in) throw DataError("checkpoint: truncated header in " + path);

  json header;
  try {
    header = json::parse(head);
  } catch (const json::exception& e) {
    throw DataError("checkpoint: corrupt header in " + path + ": " + e.what());
  }

  Checkpoint c;
  try {
    c.config = cfg::parse_config(header.at("config").dump());
    c.config_hash = header.at("config_hash").get<std::string>();
    c.epoch = header.at("epoch").get<long>();
    c.global_step = header.at("global_step").get<long>();
    c.in_channels = header.at("in_channels").get<long>();
    c.in_len = header.at("in_len").get<long>();
    for (auto& e : header.at("tensors")) {
      const auto name = e.at("name").get<std::string>();
      const auto shape = e.at("shape").get<std::vector<long>>();
      Tensor<float> t(shape);
      const auto offset = e.at("offset").get<std::uint64_t>();
      in.seekg(static_cast<std::streamoff>(sizeof kMagic + sizeof head_len + head_len +
                                           offset * sizeof(float)));
      in.read(reinterpret_cast<char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(float)));
      if (!in) throw DataError("checkpoint: truncated payload in " + path);
      c.tensors.emplace(name, std::move(t));
    }
  } catch (const json::exception& e) {
    throw DataError("checkpoint: malformed header in " + path + ": " + e.what());
  } catch (const ConfigError& e) {
    throw DataError("checkpoint: embedded config invalid in " + path + ": " + e.what());
  }
  return c;
}

net::DualNetworkState<float> restore_network(const Checkpoint& c) {
  net::DualNetworkState<float> state(c.config.model, c.in_channels, c.in_len, c.config.seed);
  net::ParamRefs<float> params;
  net::BufferRefs<float> buffers;
  state.collect_state(params, buffers);

  std::size_t filled = 0;
  auto fill = [&](const std::string& name, Tensor<float>* dst) {
    auto it = c.tensors.find(name);
    if (it == c.tensors.end()) throw DataError("checkpoint: missing tensor '" + name + "'");
    if (!it->second.same_shape(*dst))
      throw DataError("checkpoint: shape mismatch for '" + name + "': stored " +
                      it->second.shape_str() + ", expected " + dst->shape_str());
    std::memcpy(dst->data(), it->second.data(),
                static_cast<std::size_t>(dst->size()) * sizeof(float));
    ++filled;
  };
  for (auto& p : params) fill(p.name, p.value);
  for (auto& b : buffers) fill(b.name, b.value);
  if (filled != c.tensors.size())
    throw DataError("checkpoint: archive holds " + std::to_string(c.tensors.size()) +
                    " tensors but the rebuilt network needs " + std::to_string(filled));
  return state;
}

}  // namespace freqboot::ckpt
