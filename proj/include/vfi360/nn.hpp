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

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "vfi360/autodiff.hpp"
#include "vfi360/tensor.hpp"

namespace vfi360::nn {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;  // optimizer state, allocated on first step
  Tensor adam_v;
};

// Named parameters in creation order. Leaves handed to a tape share storage
// with the stored value, so the same tape must not outlive an optimizer step.
class ParamStore {
 public:
  Param& create(const std::string& name, std::vector<int> shape);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) > 0; }

  ad::NodePtr use(ad::Tape& tape, const std::string& name);
  // Moves leaf grads accumulated by backward() into param grads and forgets
  // the tape bindings.
  void harvest();
  void zero_grad();

  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }
  int64_t total_size() const;

 private:
  std::vector<Param> params_;
  std::map<std::string, size_t> index_;
  std::vector<std::pair<size_t, ad::NodePtr>> bound_;
};

// Fan-in uniform init for conv weights {Cout,Cin,kh,kw}.
void init_fan_in_uniform(Tensor& w, std::mt19937_64& rng);

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}
  void step(ParamStore& store, double lr);
  int64_t steps_taken() const { return t_; }
  void set_steps_taken(int64_t t) { t_ = t; }
  const AdamWConfig& config() const { return cfg_; }

 private:
  AdamWConfig cfg_;
  int64_t t_ = 0;
};

}  // namespace vfi360::nn
