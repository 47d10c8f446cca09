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

#include "vfi360/erp_geometry.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

namespace vfi360::erp {

double stretching_ratio(double y) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (!(y > -half_pi && y < half_pi)) {
    throw std::domain_error("stretching_ratio: latitude outside (-pi/2, pi/2)");
  }
  return std::cos(y);
}

ConditionMap condition_map(int M, int N) {
  if (M < 1 || N < 1) throw std::invalid_argument("condition_map: non-positive dimensions");
  ConditionMap c;
  c.values = Tensor({1, M, N});
  for (int m = 0; m < M; ++m) {
    const double v = std::cos((m + 0.5 - M / 2.0) / M * std::numbers::pi);
    for (int n = 0; n < N; ++n) c.values.at(0, m, n) = v;
  }
  return c;
}

ConditionMap resize_condition_map(const ConditionMap& /*c*/, int M2, int N2) {
  return condition_map(M2, N2);
}

Tensor weight_map(int H, int W) {
  ConditionMap c = condition_map(H, W);
  Tensor w({H, W});
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) w.at(y, x) = c.values.at(0, y, x);
  return w;
}

void write_condition_map(const ConditionMap& c, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_condition_map: cannot open " + path);
  const int M = c.height(), N = c.width();
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < N; ++n) {
      float v = static_cast<float>(c.values.at(0, m, n));
      static_assert(sizeof(float) == 4);
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      // little-endian byte order regardless of host
      char buf[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                     static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
      f.write(buf, 4);
    }
  }
}

}  // namespace vfi360::erp
