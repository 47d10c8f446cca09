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

#include "vfi360/metrics.hpp"

#include <cmath>
#include <vector>

#include "vfi360/erp_geometry.hpp"

namespace vfi360::metrics {

namespace {

void check_frames(const Tensor& a, const Tensor& b, const char* what) {
  if (a.ndim() != 3 || b.ndim() != 3) throw std::invalid_argument(std::string(what) + ": frames must be {C,H,W}");
  check_same_shape(a, b, what);
}

std::vector<double> gaussian_kernel_1d() {
  std::vector<double> k(kSsimWindow);
  const int r = kSsimWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - r;
    k[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[static_cast<size_t>(i)];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Local SSIM over valid windows: output {C, H-10, W-10}.
Tensor local_ssim_map(const Tensor& a, const Tensor& b, double peak) {
  const int C = a.dim(0), H = a.dim(1), W = a.dim(2);
  if (H < kSsimWindow || W < kSsimWindow) {
    throw std::invalid_argument("ssim: frame smaller than the 11x11 window");
  }
  const std::vector<double> k1 = gaussian_kernel_1d();
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  const int OH = H - kSsimWindow + 1, OW = W - kSsimWindow + 1;
  Tensor out({C, OH, OW});
  // Separable pass: horizontal then vertical filtering of the five moment maps.
  for (int c = 0; c < C; ++c) {
    const int rows = H, cols = W - kSsimWindow + 1;
    std::vector<double> ma(static_cast<size_t>(rows) * cols), mb(ma.size()), maa(ma.size()),
        mbb(ma.size()), mab(ma.size());
    for (int y = 0; y < rows; ++y) {
      for (int x = 0; x < cols; ++x) {
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        for (int i = 0; i < kSsimWindow; ++i) {
          const double va = a.at(c, y, x + i), vb = b.at(c, y, x + i), w = k1[static_cast<size_t>(i)];
          sa += w * va;
          sb += w * vb;
          saa += w * va * va;
          sbb += w * vb * vb;
          sab += w * va * vb;
        }
        const size_t idx = static_cast<size_t>(y) * cols + x;
        ma[idx] = sa;
        mb[idx] = sb;
        maa[idx] = saa;
        mbb[idx] = sbb;
        mab[idx] = sab;
      }
    }
    for (int y = 0; y < OH; ++y) {
      for (int x = 0; x < OW; ++x) {
        double mu_a = 0, mu_b = 0, e_aa = 0, e_bb = 0, e_ab = 0;
        for (int i = 0; i < kSsimWindow; ++i) {
          const size_t idx = static_cast<size_t>(y + i) * OW + x;
          const double w = k1[static_cast<size_t>(i)];
          mu_a += w * ma[idx];
          mu_b += w * mb[idx];
          e_aa += w * maa[idx];
          e_bb += w * mbb[idx];
          e_ab += w * mab[idx];
        }
        const double var_a = e_aa - mu_a * mu_a;
        const double var_b = e_bb - mu_b * mu_b;
        const double cov = e_ab - mu_a * mu_b;
        const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
        const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
        out.at(c, y, x) = num / den;
      }
    }
  }
  return out;
}

void check_weight(const Tensor& a, const Tensor& w) {
  if (w.ndim() != 2 || w.dim(0) != a.dim(1) || w.dim(1) != a.dim(2)) {
    throw std::invalid_argument("weight map shape does not match frame");
  }
  for (int64_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0)) throw std::invalid_argument("weight map must be strictly positive");
  }
}

}  // namespace

double psnr(const Tensor& a, const Tensor& b, double peak) {
  check_frames(a, b, "psnr");
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be positive");
  double mse = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCap;
  return 10.0 * std::log10(peak * peak / mse);
}

double ws_psnr(const Tensor& a, const Tensor& b, const Tensor& w, double peak) {
  check_frames(a, b, "ws_psnr");
  check_weight(a, w);
  if (!(peak > 0.0)) throw std::invalid_argument("ws_psnr: peak must be positive");
  const int C = a.dim(0), H = a.dim(1), W = a.dim(2);
  double num = 0.0, den = 0.0;
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double wv = w.at(y, x);
      for (int c = 0; c < C; ++c) {
        const double d = a.at(c, y, x) - b.at(c, y, x);
        num += wv * d * d;
      }
      den += wv;
    }
  }
  const double wmse = num / (den * C);
  if (wmse == 0.0) return kPsnrCap;
  return 10.0 * std::log10(peak * peak / wmse);
}

double ssim(const Tensor& a, const Tensor& b, double peak) {
  check_frames(a, b, "ssim");
  const Tensor m = local_ssim_map(a, b, peak);
  double s = 0.0;
  for (int64_t i = 0; i < m.size(); ++i) s += m[i];
  return s / static_cast<double>(m.size());
}

double ws_ssim(const Tensor& a, const Tensor& b, const Tensor& w, double peak) {
  check_frames(a, b, "ws_ssim");
  check_weight(a, w);
  const Tensor m = local_ssim_map(a, b, peak);
  const int C = m.dim(0), OH = m.dim(1), OW = m.dim(2);
  const int r = kSsimWindow / 2;
  double acc = 0.0;
  for (int c = 0; c < C; ++c) {
    double num = 0.0, den = 0.0;
    for (int y = 0; y < OH; ++y) {
      for (int x = 0; x < OW; ++x) {
        const double wv = w.at(y + r, x + r);  // window center
        num += wv * m.at(c, y, x);
        den += wv;
      }
    }
    acc += num / den;
  }
  return acc / C;
}

MetricReport evaluate_pair(const Tensor& pred, const Tensor& gt) {
  check_frames(pred, gt, "evaluate_pair");
  const Tensor w = erp::weight_map(pred.dim(1), pred.dim(2));
  MetricReport r;
  r.psnr = psnr(pred, gt);
  r.ssim = ssim(pred, gt);
  r.ws_psnr = ws_psnr(pred, gt, w);
  r.ws_ssim = ws_ssim(pred, gt, w);
  return r;
}

}  // namespace vfi360::metrics
