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
#include <string>

#include "vfi360/tensor.hpp"

namespace vfi360::loss {

enum class Reduction { kMean, kSum };

struct WssL1Config {
  double huber_delta = 1.0;  // branch point of the smooth-L1 core
  Reduction reduction = Reduction::kMean;
};

// Spherically weighted smooth-L1. With d = gt - pred and psi the {H,W} ERP
// weight broadcast over channels, the per-element value is
//   psi * 0.5*d*d/delta          if |d| < delta
//   psi * (|d| - 0.5*delta)      otherwise
double wss_l1(const Tensor& pred, const Tensor& gt, const Tensor& psi, const WssL1Config& cfg);

// Analytic d(loss)/d(pred), same shape as pred.
Tensor wss_l1_grad(const Tensor& pred, const Tensor& gt, const Tensor& psi,
                   const WssL1Config& cfg);

struct GradCheckResult {
  bool pass = false;
  double max_abs_err = 0.0;
  std::string detail;
};

// Central finite differences against wss_l1_grad at random points, skipping
// samples whose |d| lands within 1e-3 of the branch point.
GradCheckResult wss_l1_gradient_check(int C, int H, int W, const WssL1Config& cfg, double tol,
                                      uint64_t seed = 7);

}  // namespace vfi360::loss
