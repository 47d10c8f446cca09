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

#include "vfi360/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace vfi360::flow {

Tensor OracleFlowProvider::estimate(const Tensor& i1, const Tensor& i2) {
  check_same_shape(i1, i2, "OracleFlowProvider");
  Tensor f({2, i1.dim(1), i1.dim(2)});
  const int64_t plane = static_cast<int64_t>(i1.dim(1)) * i1.dim(2);
  for (int64_t i = 0; i < plane; ++i) {
    f[i] = dx_;
    f[plane + i] = dy_;
  }
  return f;
}

std::string OracleFlowProvider::name() const {
  std::ostringstream os;
  os << "oracle:" << dx_ << "," << dy_;
  return os.str();
}

namespace {

struct Gray {
  int h = 0, w = 0;
  std::vector<double> v;
  double at(int y, int x) const { return v[static_cast<size_t>(y) * w + x]; }
};

Gray to_gray(const Tensor& frame) {
  Gray g;
  g.h = frame.dim(1);
  g.w = frame.dim(2);
  g.v.resize(static_cast<size_t>(g.h) * g.w);
  for (int y = 0; y < g.h; ++y)
    for (int x = 0; x < g.w; ++x)
      g.v[static_cast<size_t>(y) * g.w + x] =
          (frame.at(0, y, x) + frame.at(1, y, x) + frame.at(2, y, x)) / 3.0;
  return g;
}

Gray downsample(const Gray& g) {
  Gray o;
  o.h = g.h / 2;
  o.w = g.w / 2;
  o.v.resize(static_cast<size_t>(o.h) * o.w);
  for (int y = 0; y < o.h; ++y)
    for (int x = 0; x < o.w; ++x)
      o.v[static_cast<size_t>(y) * o.w + x] =
          0.25 * (g.at(2 * y, 2 * x) + g.at(2 * y, 2 * x + 1) + g.at(2 * y + 1, 2 * x) +
                  g.at(2 * y + 1, 2 * x + 1));
  return o;
}

double block_sad(const Gray& a, const Gray& b, int y0, int x0, int dy, int dx, int block) {
  double sad = 0.0;
  for (int y = y0; y < y0 + block; ++y) {
    for (int x = x0; x < x0 + block; ++x) {
      const int by = std::clamp(y + dy, 0, b.h - 1);
      const int bx = std::clamp(x + dx, 0, b.w - 1);
      sad += std::fabs(a.at(y, x) - b.at(by, bx));
    }
  }
  return sad;
}

}  // namespace

Tensor BlockMatchingFlowProvider::estimate(const Tensor& i1, const Tensor& i2) {
  check_same_shape(i1, i2, "BlockMatchingFlowProvider");
  std::vector<Gray> pyr_a{to_gray(i1)}, pyr_b{to_gray(i2)};
  while (static_cast<int>(pyr_a.size()) < max_levels_ &&
         std::min(pyr_a.back().h, pyr_a.back().w) >= 2 * block_ * 2) {
    pyr_a.push_back(downsample(pyr_a.back()));
    pyr_b.push_back(downsample(pyr_b.back()));
  }

  // per-level dense flow carried as two planes
  int h = pyr_a.back().h, w = pyr_a.back().w;
  std::vector<double> fx(static_cast<size_t>(h) * w, 0.0), fy(fx.size(), 0.0);
  for (int lvl = static_cast<int>(pyr_a.size()) - 1; lvl >= 0; --lvl) {
    const Gray& a = pyr_a[static_cast<size_t>(lvl)];
    const Gray& b = pyr_b[static_cast<size_t>(lvl)];
    if (a.h != h || a.w != w) {
      // nearest upscale of the coarser flow, values doubled
      std::vector<double> nfx(static_cast<size_t>(a.h) * a.w), nfy(nfx.size());
      for (int y = 0; y < a.h; ++y)
        for (int x = 0; x < a.w; ++x) {
          const size_t src = static_cast<size_t>(std::min(y / 2, h - 1)) * w + std::min(x / 2, w - 1);
          nfx[static_cast<size_t>(y) * a.w + x] = 2.0 * fx[src];
          nfy[static_cast<size_t>(y) * a.w + x] = 2.0 * fy[src];
        }
      fx.swap(nfx);
      fy.swap(nfy);
      h = a.h;
      w = a.w;
    }
    for (int y0 = 0; y0 + block_ <= h; y0 += block_) {
      for (int x0 = 0; x0 + block_ <= w; x0 += block_) {
        const int px = static_cast<int>(std::lround(fx[static_cast<size_t>(y0) * w + x0]));
        const int py = static_cast<int>(std::lround(fy[static_cast<size_t>(y0) * w + x0]));
        int best_dx = px, best_dy = py;
        double best = block_sad(a, b, y0, x0, py, px, block_);
        for (int dy = py - radius_; dy <= py + radius_; ++dy) {
          for (int dx = px - radius_; dx <= px + radius_; ++dx) {
            if (dy == py && dx == px) continue;
            const double sad = block_sad(a, b, y0, x0, dy, dx, block_);
            if (sad < best - 1e-12) {
              best = sad;
              best_dy = dy;
              best_dx = dx;
            }
          }
        }
        for (int y = y0; y < std::min(y0 + block_, h); ++y) {
          for (int x = x0; x < std::min(x0 + block_, w); ++x) {
            fx[static_cast<size_t>(y) * w + x] = best_dx;
            fy[static_cast<size_t>(y) * w + x] = best_dy;
          }
        }
      }
    }
  }

  Tensor f({2, h, w});
  const int64_t plane = static_cast<int64_t>(h) * w;
  for (int64_t i = 0; i < plane; ++i) {
    f[i] = fx[static_cast<size_t>(i)];
    f[plane + i] = fy[static_cast<size_t>(i)];
  }
  return f;
}

std::unique_ptr<FlowProvider> make_provider(const std::string& spec) {
  if (spec == "bm" || spec == "block_matching") return std::make_unique<BlockMatchingFlowProvider>();
  if (spec.rfind("oracle:", 0) == 0) {
    const std::string rest = spec.substr(7);
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("flow: want oracle:<dx>,<dy>");
    return std::make_unique<OracleFlowProvider>(std::stod(rest.substr(0, comma)),
                                                std::stod(rest.substr(comma + 1)));
  }
  throw std::invalid_argument("flow: unknown provider spec '" + spec + "'");
}

}  // namespace vfi360::flow
