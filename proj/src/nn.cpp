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

#include "vfi360/nn.hpp"

#include <cmath>

namespace vfi360::nn {

Param& ParamStore::create(const std::string& name, std::vector<int> shape) {
  if (index_.count(name)) throw std::logic_error("ParamStore: duplicate param " + name);
  Param p;
  p.name = name;
  p.value = Tensor(std::move(shape));
  p.grad = Tensor::zeros_like(p.value);
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return params_.back();
}

Param& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("ParamStore: unknown param " + name);
  return params_[it->second];
}

const Param& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("ParamStore: unknown param " + name);
  return params_[it->second];
}

ad::NodePtr ParamStore::use(ad::Tape& tape, const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("ParamStore: unknown param " + name);
  ad::NodePtr n = tape.leaf(params_[it->second].value, /*requires_grad=*/tape.grad_enabled());
  if (tape.grad_enabled()) bound_.emplace_back(it->second, n);
  return n;
}

void ParamStore::harvest() {
  for (auto& [idx, node] : bound_) {
    if (node->grad.empty()) continue;
    Param& p = params_[idx];
    for (int64_t i = 0; i < p.grad.size(); ++i) p.grad[i] += node->grad[i];
  }
  bound_.clear();
}

void ParamStore::zero_grad() {
  for (Param& p : params_) p.grad.fill(0.0);
  bound_.clear();
}

int64_t ParamStore::total_size() const {
  int64_t n = 0;
  for (const Param& p : params_) n += p.value.size();
  return n;
}

void init_fan_in_uniform(Tensor& w, std::mt19937_64& rng) {
  int64_t fan_in = 1;
  for (int i = 1; i < w.ndim(); ++i) fan_in *= w.dim(i);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> uni(-bound, bound);
  for (int64_t i = 0; i < w.size(); ++i) w[i] = uni(rng);
}

void AdamW::step(ParamStore& store, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Param& p : store.params()) {
    if (p.adam_m.empty()) {
      p.adam_m = Tensor::zeros_like(p.value);
      p.adam_v = Tensor::zeros_like(p.value);
    }
    for (int64_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      p.adam_m[i] = cfg_.beta1 * p.adam_m[i] + (1.0 - cfg_.beta1) * g;
      p.adam_v[i] = cfg_.beta2 * p.adam_v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = p.adam_m[i] / bc1;
      const double vhat = p.adam_v[i] / bc2;
      p.value[i] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * p.value[i]);
    }
  }
}

}  // namespace vfi360::nn
