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

#include <string>

#include "vfi360/tensor.hpp"

namespace vfi360::erp {

// Latitude-dependent ERP distortion prior: a {1,M,N} grid of values in (0,1],
// row-constant, vertically symmetric, largest at the equator rows.
struct ConditionMap {
  Tensor values;  // {1,M,N}
  int height() const { return values.dim(1); }
  int width() const { return values.dim(2); }
};

// Area stretching ratio of the equirectangular projection at latitude y
// (radians, y in (-pi/2, pi/2)): cos(y).
double stretching_ratio(double y);

// Distortion condition map at resolution M x N. Row m carries
// cos(((m + 0.5 - M/2) / M) * pi), the stretching ratio at the pixel-center
// latitude of that row.
ConditionMap condition_map(int M, int N);

// Analytic recomputation at a new resolution. Never interpolates from `c`.
ConditionMap resize_condition_map(const ConditionMap& c, int M2, int N2);

// Condition values broadcast to an {H,W} grid, used to weight metrics and
// the training loss.
Tensor weight_map(int H, int W);

// Raw dump for inspection: row-major little-endian float32, M*N values.
void write_condition_map(const ConditionMap& c, const std::string& path);

}  // namespace vfi360::erp
