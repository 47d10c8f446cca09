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
#include <optional>
#include <string>
#include <vector>

#include "vfi360/autodiff.hpp"
#include "vfi360/nn.hpp"
#include "vfi360/tensor.hpp"

namespace vfi360::model {

struct ModelConfig {
  int levels = 4;
  std::vector<int> channels = {32, 48, 64, 96};  // finest to coarsest
  bool guard = true;  // distortion-conditioned deformable extractor blocks
  bool ftb = true;    // affine feature-transform layers in the decoder

  bool operator==(const ModelConfig&) const = default;
};

// Bilateral flow state at one pyramid level. flow is {4,h,w}: channels 0-1
// are the (dx,dy) field toward frame 1, channels 2-3 toward frame 2.
struct LevelState {
  ad::NodePtr flow;
  ad::NodePtr mask_logit;  // {1,h,w}
  ad::NodePtr feat;        // decoder feature, {C_l,h,w}
  ad::NodePtr residual;    // {3,h,w}, finest level only
};

struct ForwardResult {
  ad::NodePtr pred;  // {3,H,W}, clamped to [0,1]
  LevelState finest;
};

// DFT affine transform: alpha (.) f + beta, all same shape.
ad::NodePtr dft_apply(ad::Tape& t, const ad::NodePtr& f, const ad::NodePtr& alpha,
                      const ad::NodePtr& beta_shift);

// Pyramid encoder + coarse-to-fine flow/frame decoder conditioned on the
// ERP distortion prior.
class Vfi360Net {
 public:
  explicit Vfi360Net(ModelConfig cfg = {}, uint64_t seed = 360);

  const ModelConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return store_; }
  const nn::ParamStore& params() const { return store_; }
  int64_t parameter_count() const { return store_.total_size(); }

  // Feature pyramid for one frame; shared weights across the two inputs.
  // Offsets in the extractor depend only on the distortion prior.
  std::vector<ad::NodePtr> extract_pyramid(ad::Tape& t, const ad::NodePtr& frame);

  // One decoder step at level `level` (1 = finest). `prev` must already be
  // upsampled to this level's resolution (flow values doubled); pass
  // std::nullopt at the coarsest level to start from zero flow.
  LevelState decode_level(ad::Tape& t, int level, const ad::NodePtr& phi0,
                          const ad::NodePtr& phi1, const std::optional<LevelState>& prev);

  ForwardResult forward(ad::Tape& t, const ad::NodePtr& i1, const ad::NodePtr& i2);

  // Inference: no-grad forward, deterministic, output clamped to [0,1].
  Tensor interpolate(const Tensor& i1, const Tensor& i2);

  void check_input(const Tensor& i1, const Tensor& i2) const;

 private:
  ad::NodePtr cond_leaf(ad::Tape& t, int h, int w) const;
  ad::NodePtr offset_field(ad::Tape& t, int level, const ad::NodePtr& cond);
  ad::NodePtr conv(ad::Tape& t, const ad::NodePtr& x, const std::string& name, int stride,
                   int pad);

  ModelConfig cfg_;
  nn::ParamStore store_;
};

int64_t count_parameters(bool guard, bool ftb);

}  // namespace vfi360::model
