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

#include "vfi360/tensor.hpp"

namespace vfi360::metrics {

// PSNR reported for identical frames (zero MSE) instead of infinity.
inline constexpr double kPsnrCap = 99.0;
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

struct MetricReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double ws_psnr = 0.0;
  double ws_ssim = 0.0;
};

// Frames are {C,H,W} in [0,1]. Weight maps are {H,W}, strictly positive,
// shared across channels.
double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);
double ws_psnr(const Tensor& a, const Tensor& b, const Tensor& w, double peak = 1.0);

// Mean local SSIM over valid 11x11 Gaussian windows (sigma 1.5, no padding),
// averaged over channels. C1=(0.01*peak)^2, C2=(0.03*peak)^2.
double ssim(const Tensor& a, const Tensor& b, double peak = 1.0);
// Local SSIM map weighted by the window-center value of `w`.
double ws_ssim(const Tensor& a, const Tensor& b, const Tensor& w, double peak = 1.0);

// All four metrics with the analytic ERP weight map for the frame height.
MetricReport evaluate_pair(const Tensor& pred, const Tensor& gt);

}  // namespace vfi360::metrics
