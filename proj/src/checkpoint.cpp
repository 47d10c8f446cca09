// Copyright 2026 The vfi360 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vfi360/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"

namespace vfi360::checkpoint {

namespace {

constexpr char kMagic[8] = {'V', 'F', '3', '6', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

using nlohmann::json;

json config_json(const model::ModelConfig& c) {
  return json{{"levels", c.levels}, {"channels", c.channels}, {"guard", c.guard}, {"ftb", c.ftb}};
}

model::ModelConfig config_from_json(const json& j) {
  model::ModelConfig c;
  c.levels = j.at("levels").get<int>();
  c.channels = j.at("channels").get<std::vector<int>>();
  c.guard = j.at("guard").get<bool>();
  c.ftb = j.at("ftb").get<bool>();
  return c;
}

void write_tensor(std::ofstream& f, const Tensor& t) {
  f.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * 8));
}

void read_tensor(std::ifstream& f, Tensor& t) {
  f.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * 8));
  if (!f) throw std::runtime_error("checkpoint: truncated tensor data");
}

json read_header(std::ifstream& f, const std::string& path) {
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  uint32_t version = 0;
  uint64_t hlen = 0;
  f.read(reinterpret_cast<char*>(&version), 4);
  f.read(reinterpret_cast<char*>(&hlen), 8);
  if (!f || version != kVersion) throw std::runtime_error("checkpoint: unsupported version");
  std::string header(hlen, '\0');
  f.read(header.data(), static_cast<std::streamsize>(hlen));
  if (!f) throw std::runtime_error("checkpoint: truncated header");
  return json::parse(header);
}

}  // namespace

void save(const model::Vfi360Net& net, const Meta& meta, const std::string& path,
          bool include_optimizer_state) {
  json header;
  header["model"] = config_json(net.config());
  header["iteration"] = meta.iteration;
  header["adam_steps"] = meta.adam_steps;
  header["fingerprint"] = meta.config_fingerprint;
  header["optimizer_state"] = include_optimizer_state;
  json tensors = json::array();
  for (const nn::Param& p : net.params().params()) {
    tensors.push_back(json{{"name", p.name}, {"shape", p.value.shape()}});
  }
  header["tensors"] = tensors;
  const std::string hs = header.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  f.write(kMagic, 8);
  const uint32_t version = kVersion;
  const uint64_t hlen = hs.size();
  f.write(reinterpret_cast<const char*>(&version), 4);
  f.write(reinterpret_cast<const char*>(&hlen), 8);
  f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const nn::Param& p : net.params().params()) write_tensor(f, p.value);
  if (include_optimizer_state) {
    for (const nn::Param& p : net.params().params()) {
      Tensor m = p.adam_m.empty() ? Tensor::zeros_like(p.value) : p.adam_m;
      Tensor v = p.adam_v.empty() ? Tensor::zeros_like(p.value) : p.adam_v;
      write_tensor(f, m);
      write_tensor(f, v);
    }
  }
  if (!f) throw std::runtime_error("checkpoint: write failed for " + path);
}

Loaded load(const std::string& path, model::Vfi360Net* net,
            const std::optional<model::ModelConfig>& expect) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  const json header = read_header(f, path);

  Loaded out;
  out.config = config_from_json(header.at("model"));
  out.meta.iteration = header.at("iteration").get<int64_t>();
  out.meta.adam_steps = header.at("adam_steps").get<int64_t>();
  out.meta.config_fingerprint = header.value("fingerprint", "");
  out.meta.has_optimizer_state = header.value("optimizer_state", false);

  if (expect && !(out.config == *expect)) {
    throw std::runtime_error("checkpoint: stored model config does not match the expected one (" +
                             path + ")");
  }
  if (net) {
    if (!(net->config() == out.config)) {
      throw std::runtime_error("checkpoint: model config/ablation flags mismatch, refusing to load " +
                               path);
    }
    for (const auto& tj : header.at("tensors")) {
      nn::Param& p = net->params().get(tj.at("name").get<std::string>());
      const auto shape = tj.at("shape").get<std::vector<int>>();
      if (shape != p.value.shape()) throw std::runtime_error("checkpoint: tensor shape mismatch");
      read_tensor(f, p.value);
    }
    if (out.meta.has_optimizer_state) {
      for (const auto& tj : header.at("tensors")) {
        nn::Param& p = net->params().get(tj.at("name").get<std::string>());
        if (p.adam_m.empty()) {
          p.adam_m = Tensor::zeros_like(p.value);
          p.adam_v = Tensor::zeros_like(p.value);
        }
        read_tensor(f, p.adam_m);
        read_tensor(f, p.adam_v);
      }
    }
  }
  return out;
}

model::ModelConfig peek_config(const std::string& path) {
  return load(path, nullptr).config;
}

}  // namespace vfi360::checkpoint
