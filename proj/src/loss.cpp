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

#include "vfi360/loss.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace vfi360::loss {

namespace {

void check_inputs(const Tensor& pred, const Tensor& gt, const Tensor& psi,
                  const WssL1Config& cfg) {
  check_same_shape(pred, gt, "wss_l1");
  if (pred.ndim() != 3) throw std::invalid_argument("wss_l1: frames must be {C,H,W}");
  if (psi.ndim() != 2 || psi.dim(0) != pred.dim(1) || psi.dim(1) != pred.dim(2)) {
    throw std::invalid_argument("wss_l1: psi shape does not match frame");
  }
  for (int64_t i = 0; i < psi.size(); ++i) {
    if (!(psi[i] > 0.0)) throw std::invalid_argument("wss_l1: psi must be strictly positive");
  }
  if (!(cfg.huber_delta > 0.0)) throw std::invalid_argument("wss_l1: huber_delta must be positive");
}

}  // namespace

double wss_l1(const Tensor& pred, const Tensor& gt, const Tensor& psi, const WssL1Config& cfg) {
  check_inputs(pred, gt, psi, cfg);
  const int C = pred.dim(0), H = pred.dim(1), W = pred.dim(2);
  const double delta = cfg.huber_delta;
  double acc = 0.0;
  for (int c = 0; c < C; ++c) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const double d = gt.at(c, y, x) - pred.at(c, y, x);
        const double ad = std::fabs(d);
        const double core = ad < delta ? 0.5 * d * d / delta : ad - 0.5 * delta;
        acc += psi.at(y, x) * core;
      }
    }
  }
  if (cfg.reduction == Reduction::kMean) acc /= static_cast<double>(pred.size());
  return acc;
}

Tensor wss_l1_grad(const Tensor& pred, const Tensor& gt, const Tensor& psi,
                   const WssL1Config& cfg) {
  check_inputs(pred, gt, psi, cfg);
  const int C = pred.dim(0), H = pred.dim(1), W = pred.dim(2);
  const double delta = cfg.huber_delta;
  const double scale =
      cfg.reduction == Reduction::kMean ? 1.0 / static_cast<double>(pred.size()) : 1.0;
  Tensor g = Tensor::zeros_like(pred);
  for (int c = 0; c < C; ++c) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const double d = gt.at(c, y, x) - pred.at(c, y, x);
        const double dcore_dd = std::fabs(d) < delta ? d / delta : (d > 0 ? 1.0 : -1.0);
        g.at(c, y, x) = -psi.at(y, x) * dcore_dd * scale;  // d(d)/d(pred) = -1
      }
    }
  }
  return g;
}

GradCheckResult wss_l1_gradient_check(int C, int H, int W, const WssL1Config& cfg, double tol,
                                      uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-2.0 * cfg.huber_delta, 2.0 * cfg.huber_delta);
  Tensor pred({C, H, W}), gt({C, H, W}), psi({H, W});
  for (int64_t i = 0; i < pred.size(); ++i) {
    double d;
    do {
      d = uni(rng);
    } while (std::fabs(std::fabs(d) - cfg.huber_delta) < 1e-3);  // keep away from the kink
    pred[i] = 0.0;
    gt[i] = d;
  }
  std::uniform_real_distribution<double> wuni(0.1, 1.0);
  for (int64_t i = 0; i < psi.size(); ++i) psi[i] = wuni(rng);

  const Tensor analytic = wss_l1_grad(pred, gt, psi, cfg);
  const double h = 1e-6 * std::max(1.0, cfg.huber_delta);
  GradCheckResult res;
  std::uniform_int_distribution<int64_t> pick(0, pred.size() - 1);
  const int samples = 64;
  for (int s = 0; s < samples; ++s) {
    const int64_t i = pick(rng);
    const double orig = pred[i];
    pred[i] = orig + h;
    const double lp = wss_l1(pred, gt, psi, cfg);
    pred[i] = orig - h;
    const double lm = wss_l1(pred, gt, psi, cfg);
    pred[i] = orig;
    const double fd = (lp - lm) / (2.0 * h);
    const double err = std::fabs(fd - analytic[i]);
    if (err > res.max_abs_err) res.max_abs_err = err;
  }
  res.pass = res.max_abs_err <= tol;
  if (!res.pass) {
    std::ostringstream os;
    os << "max |analytic - finite difference| = " << res.max_abs_err << " exceeds tol " << tol;
    res.detail = os.str();
  }
  return res;
}

}  // namespace vfi360::loss
