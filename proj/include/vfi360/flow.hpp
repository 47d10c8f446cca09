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

#include <memory>
#include <string>

#include "vfi360/tensor.hpp"

namespace vfi360::flow {

// Estimates per-pixel motion between two {3,H,W} frames, returned as {2,H,W}
// (channel 0 horizontal, channel 1 vertical, pixels). Implementations must be
// deterministic for fixed inputs.
class FlowProvider {
 public:
  virtual ~FlowProvider() = default;
  virtual Tensor estimate(const Tensor& i1, const Tensor& i2) = 0;
  virtual std::string name() const = 0;
};

// Constant-field oracle for synthetic fixtures with known motion.
class OracleFlowProvider : public FlowProvider {
 public:
  OracleFlowProvider(double dx, double dy) : dx_(dx), dy_(dy) {}
  Tensor estimate(const Tensor& i1, const Tensor& i2) override;
  std::string name() const override;

 private:
  double dx_, dy_;
};

// Coarse-to-fine block matching on the grayscale frames: SAD over 8x8 blocks,
// +-3 px search per pyramid level, flow doubled between levels. Ties resolve
// to the smallest displacement, so results are deterministic.
class BlockMatchingFlowProvider : public FlowProvider {
 public:
  explicit BlockMatchingFlowProvider(int block = 8, int radius = 3, int max_levels = 3)
      : block_(block), radius_(radius), max_levels_(max_levels) {}
  Tensor estimate(const Tensor& i1, const Tensor& i2) override;
  std::string name() const override { return "block_matching"; }

 private:
  int block_, radius_, max_levels_;
};

// "bm" or "oracle:<dx>,<dy>".
std::unique_ptr<FlowProvider> make_provider(const std::string& spec);

}  // namespace vfi360::flow
