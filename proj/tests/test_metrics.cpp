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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "vfi360/erp_geometry.hpp"
#include "vfi360/metrics.hpp"

using namespace vfi360;

namespace {

Tensor random_frame(int C, int H, int W, uint64_t seed) {
  Tensor t({C, H, W});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int64_t i = 0; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

// Scalar-loop oracles, written independently of the library internals.

double oracle_psnr(const Tensor& a, const Tensor& b, double peak) {
  double mse = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]);
  mse /= static_cast<double>(a.size());
  if (mse == 0.0) return metrics::kPsnrCap;
  return std::min(metrics::kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double oracle_ws_psnr(const Tensor& a, const Tensor& b, const Tensor& w, double peak) {
  const int C = a.dim(0), H = a.dim(1), W = a.dim(2);
  double num = 0.0, den = 0.0;
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        const double d = a.at(c, y, x) - b.at(c, y, x);
        num += w.at(y, x) * d * d;
        den += w.at(y, x);
      }
  const double wmse = num / den;
  if (wmse == 0.0) return metrics::kPsnrCap;
  return std::min(metrics::kPsnrCap, 10.0 * std::log10(peak * peak / wmse));
}

std::vector<double> gaussian_kernel() {
  std::vector<double> k(metrics::kSsimWindow);
  double s = 0.0;
  for (int i = 0; i < metrics::kSsimWindow; ++i) {
    const double d = i - (metrics::kSsimWindow - 1) / 2.0;
    k[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * metrics::kSsimSigma * metrics::kSsimSigma));
    s += k[static_cast<size_t>(i)];
  }
  for (double& v : k) v /= s;
  return k;
}

// SSIM map over valid windows only, brute force per window.
double oracle_ssim_window(const Tensor& a, const Tensor& b, int c, int y0, int x0, double peak) {
  const std::vector<double> k = gaussian_kernel();
  double mu_a = 0.0, mu_b = 0.0;
  for (int i = 0; i < metrics::kSsimWindow; ++i)
    for (int j = 0; j < metrics::kSsimWindow; ++j) {
      const double wgt = k[static_cast<size_t>(i)] * k[static_cast<size_t>(j)];
      mu_a += wgt * a.at(c, y0 + i, x0 + j);
      mu_b += wgt * b.at(c, y0 + i, x0 + j);
    }
  double va = 0.0, vb = 0.0, cov = 0.0;
  for (int i = 0; i < metrics::kSsimWindow; ++i)
    for (int j = 0; j < metrics::kSsimWindow; ++j) {
      const double wgt = k[static_cast<size_t>(i)] * k[static_cast<size_t>(j)];
      const double da = a.at(c, y0 + i, x0 + j) - mu_a;
      const double db = b.at(c, y0 + i, x0 + j) - mu_b;
      va += wgt * da * da;
      vb += wgt * db * db;
      cov += wgt * da * db;
    }
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  return ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
         ((mu_a * mu_a + mu_b * mu_b + c1) * (va + vb + c2));
}

double oracle_ssim(const Tensor& a, const Tensor& b, double peak) {
  const int C = a.dim(0), H = a.dim(1), W = a.dim(2);
  double acc = 0.0;
  int64_t n = 0;
  for (int c = 0; c < C; ++c)
    for (int y0 = 0; y0 + metrics::kSsimWindow <= H; ++y0)
      for (int x0 = 0; x0 + metrics::kSsimWindow <= W; ++x0) {
        acc += oracle_ssim_window(a, b, c, y0, x0, peak);
        n++;
      }
  return acc / static_cast<double>(n);
}

double oracle_ws_ssim(const Tensor& a, const Tensor& b, const Tensor& w, double peak) {
  const int C = a.dim(0), H = a.dim(1), W = a.dim(2);
  const int half = metrics::kSsimWindow / 2;
  double num = 0.0, den = 0.0;
  for (int c = 0; c < C; ++c)
    for (int y0 = 0; y0 + metrics::kSsimWindow <= H; ++y0)
      for (int x0 = 0; x0 + metrics::kSsimWindow <= W; ++x0) {
        const double wgt = w.at(y0 + half, x0 + half);
        num += wgt * oracle_ssim_window(a, b, c, y0, x0, peak);
        den += wgt;
      }
  return num / den;
}

}  // namespace

TEST_CASE("psnr reference values") {
  Tensor a({1, 4, 4}), b({1, 4, 4});
  a.fill(0.0);
  b.fill(0.5);
  CHECK(std::fabs(metrics::psnr(a, b) - 6.0206) < 1e-4);
  b.fill(0.0);
  CHECK(metrics::psnr(a, b) == metrics::kPsnrCap);
  b.fill(1.0);
  CHECK(metrics::psnr(a, b) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("oracle equivalence on 20 random 16x32 pairs") {
  const Tensor w = erp::weight_map(16, 32);
  for (uint64_t s = 0; s < 20; ++s) {
    const Tensor a = random_frame(3, 16, 32, 100 + s);
    const Tensor b = random_frame(3, 16, 32, 200 + s);
    CHECK(std::fabs(metrics::psnr(a, b) - oracle_psnr(a, b, 1.0)) < 1e-9);
    CHECK(std::fabs(metrics::ws_psnr(a, b, w) - oracle_ws_psnr(a, b, w, 1.0)) < 1e-9);
    CHECK(std::fabs(metrics::ssim(a, b) - oracle_ssim(a, b, 1.0)) < 1e-9);
    CHECK(std::fabs(metrics::ws_ssim(a, b, w) - oracle_ws_ssim(a, b, w, 1.0)) < 1e-9);
  }
}

TEST_CASE("uniform weights reduce WS variants to the plain metrics") {
  Tensor w({16, 32});
  w.fill(1.0);
  const Tensor a = random_frame(3, 16, 32, 1);
  const Tensor b = random_frame(3, 16, 32, 2);
  CHECK(std::fabs(metrics::ws_psnr(a, b, w) - metrics::psnr(a, b)) < 1e-9);
  CHECK(std::fabs(metrics::ws_ssim(a, b, w) - metrics::ssim(a, b)) < 1e-9);
}

TEST_CASE("symmetry in the two frames") {
  const Tensor a = random_frame(3, 16, 32, 3);
  const Tensor b = random_frame(3, 16, 32, 4);
  const Tensor w = erp::weight_map(16, 32);
  CHECK(metrics::psnr(a, b) == metrics::psnr(b, a));
  CHECK(metrics::ws_psnr(a, b, w) == metrics::ws_psnr(b, a, w));
  CHECK(metrics::ssim(a, b) == doctest::Approx(metrics::ssim(b, a)).epsilon(1e-12));
  CHECK(metrics::ws_ssim(a, b, w) == doctest::Approx(metrics::ws_ssim(b, a, w)).epsilon(1e-12));
}

TEST_CASE("ws_psnr invariant under simultaneous vertical flip") {
  const int H = 16, W = 32;
  const Tensor a = random_frame(1, H, W, 5);
  const Tensor b = random_frame(1, H, W, 6);
  Tensor af({1, H, W}), bf({1, H, W});
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      af.at(0, H - 1 - y, x) = a.at(0, y, x);
      bf.at(0, H - 1 - y, x) = b.at(0, y, x);
    }
  const Tensor w = erp::weight_map(H, W);
  CHECK(std::fabs(metrics::ws_psnr(a, b, w) - metrics::ws_psnr(af, bf, w)) < 1e-9);
}

TEST_CASE("error near the poles hurts less than at the equator") {
  const int H = 32, W = 64;
  const Tensor w = erp::weight_map(H, W);
  Tensor base = random_frame(1, H, W, 7);
  Tensor polar = base.clone(), equator = base.clone();
  for (int x = 0; x < W; ++x) {
    polar.at(0, 0, x) = std::min(1.0, polar.at(0, 0, x) + 0.4);
    equator.at(0, H / 2, x) = std::min(1.0, equator.at(0, H / 2, x) + 0.4);
  }
  CHECK(metrics::ws_psnr(base, polar, w) > metrics::ws_psnr(base, equator, w));
  CHECK(metrics::ws_ssim(base, polar, w) > metrics::ws_ssim(base, equator, w));
}

TEST_CASE("ssim reference behaviour") {
  const Tensor a = random_frame(1, 16, 32, 8);
  CHECK(metrics::ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));

  Tensor c1({1, 16, 32}), c2({1, 16, 32});
  c1.fill(0.2);
  c2.fill(0.8);
  const double k1 = 0.01 * 0.01;
  const double want = (2.0 * 0.2 * 0.8 + k1) / (0.2 * 0.2 + 0.8 * 0.8 + k1);
  CHECK(std::fabs(metrics::ssim(c1, c2) - want) < 1e-9);
  CHECK(metrics::ssim(c1, c2) > 0.0);
  CHECK(metrics::ssim(c1, c2) < 1.0);

  Tensor inv({1, 16, 32});
  for (int64_t i = 0; i < a.size(); ++i) inv[i] = 1.0 - a[i];
  CHECK(metrics::ssim(a, inv) < metrics::ssim(a, a));
  CHECK(metrics::ssim(a, inv) >= -1.0);
  CHECK(metrics::ssim(a, inv) <= 1.0);
}

TEST_CASE("ws_ssim basics") {
  const Tensor a = random_frame(1, 16, 32, 9);
  const Tensor w = erp::weight_map(16, 32);
  CHECK(metrics::ws_ssim(a, a, w) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evaluate_pair composes the four metrics") {
  const Tensor a = random_frame(3, 16, 32, 10);
  const Tensor b = random_frame(3, 16, 32, 11);
  const metrics::MetricReport r = metrics::evaluate_pair(a, b);
  const Tensor w = erp::weight_map(16, 32);
  CHECK(r.psnr == metrics::psnr(a, b));
  CHECK(r.ssim == metrics::ssim(a, b));
  CHECK(r.ws_psnr == metrics::ws_psnr(a, b, w));
  CHECK(r.ws_ssim == metrics::ws_ssim(a, b, w));

  const metrics::MetricReport self = metrics::evaluate_pair(a, a);
  CHECK(self.psnr == metrics::kPsnrCap);
  CHECK(self.ws_psnr == metrics::kPsnrCap);
  CHECK(self.ssim == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(self.ws_ssim == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("non-positive weights are rejected") {
  const Tensor a = random_frame(1, 16, 32, 12);
  Tensor w({16, 32});
  w.fill(0.0);
  CHECK_THROWS(metrics::ws_psnr(a, a, w));
  CHECK_THROWS(metrics::ws_ssim(a, a, w));
}
