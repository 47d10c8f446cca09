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
#include <cstdio>
#include <random>

#include "vfi360/checkpoint.hpp"
#include "vfi360/model.hpp"

using namespace vfi360;

namespace {

Tensor random_frame(int H, int W, uint64_t seed) {
  Tensor t({3, H, W});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int64_t i = 0; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

Tensor vflip_image(const Tensor& x) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  Tensor o({C, H, W});
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < H; ++y)
      for (int xx = 0; xx < W; ++xx) o.at(c, H - 1 - y, xx) = x.at(c, y, xx);
  return o;
}

// Flips a conv kernel {O,C,KH,KW} along its vertical axis.
void vflip_kernel(Tensor& w) {
  const int O = w.dim(0), C = w.dim(1), KH = w.dim(2), KW = w.dim(3);
  Tensor copy = w.clone();
  for (int o = 0; o < O; ++o)
    for (int c = 0; c < C; ++c)
      for (int i = 0; i < KH; ++i)
        for (int j = 0; j < KW; ++j)
          w[((static_cast<int64_t>(o) * C + c) * KH + i) * KW + j] =
              copy[((static_cast<int64_t>(o) * C + c) * KH + (KH - 1 - i)) * KW + j];
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.shape() == b.shape());
  double m = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("dft affine algebra") {
  Tensor f({2, 3, 4});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int64_t i = 0; i < f.size(); ++i) f[i] = u(rng);

  ad::Tape t(false);
  auto make = [&](double v, std::vector<int> shape) {
    Tensor x(std::move(shape));
    x.fill(v);
    return t.leaf(x);
  };
  ad::NodePtr fn = t.leaf(f);

  SUBCASE("identity: alpha=1, beta=0") {
    ad::NodePtr out = model::dft_apply(t, fn, make(1.0, f.shape()), make(0.0, f.shape()));
    CHECK(max_abs_diff(out->value, f) == 0.0);
  }
  SUBCASE("alpha=2, beta=1, f=0.5 gives all 2.0") {
    ad::NodePtr half = make(0.5, {1, 2, 2});
    ad::NodePtr out = model::dft_apply(t, half, make(2.0, {1, 2, 2}), make(1.0, {1, 2, 2}));
    for (int64_t i = 0; i < out->value.size(); ++i) CHECK(out->value[i] == 2.0);
  }
  SUBCASE("alpha=0 annihilates to beta") {
    ad::NodePtr beta = t.leaf(random_frame(3, 4, 2));
    Tensor fx({3, 3, 4});
    fx.fill(7.0);
    ad::NodePtr out = model::dft_apply(t, t.leaf(fx), make(0.0, fx.shape()), beta);
    CHECK(max_abs_diff(out->value, beta->value) == 0.0);
  }
  SUBCASE("inverse transform recovers the input") {
    Tensor alpha(f.shape()), beta(f.shape()), inv_a(f.shape()), inv_b(f.shape());
    for (int64_t i = 0; i < f.size(); ++i) {
      alpha[i] = 0.5 + std::fabs(u(rng));  // bounded away from 0
      beta[i] = u(rng);
      inv_a[i] = 1.0 / alpha[i];
      inv_b[i] = -beta[i] / alpha[i];
    }
    ad::NodePtr fwd = model::dft_apply(t, fn, t.leaf(alpha), t.leaf(beta));
    ad::NodePtr back = model::dft_apply(t, fwd, t.leaf(inv_a), t.leaf(inv_b));
    CHECK(max_abs_diff(back->value, f) < 1e-5);
  }
}

TEST_CASE("encoder pyramid shape contract") {
  model::Vfi360Net net;
  ad::Tape t(false);
  ad::NodePtr frame = t.leaf(random_frame(64, 128, 3));
  const std::vector<ad::NodePtr> pyr = net.extract_pyramid(t, frame);
  REQUIRE(pyr.size() == 4);
  const int heights[4] = {32, 16, 8, 4};
  const int chans[4] = {32, 48, 64, 96};
  for (int l = 0; l < 4; ++l) {
    CHECK(pyr[static_cast<size_t>(l)]->value.shape() ==
          std::vector<int>{chans[l], heights[l], heights[l] * 2});
  }
  // dims not divisible by 2^levels are rejected
  ad::NodePtr bad = t.leaf(random_frame(60, 128, 4));
  CHECK_THROWS_AS(net.extract_pyramid(t, bad), std::invalid_argument);
}

TEST_CASE("offsets are computed from the distortion prior only") {
  model::Vfi360Net guard_net;  // guard on by default
  // The offset branch consumes a 1-channel input: the analytic prior. Frame
  // features cannot reach it by construction.
  for (int l = 1; l <= 4; ++l) {
    const std::string base = "enc.l" + std::to_string(l);
    const nn::Param& w0 = guard_net.params().get(base + ".offset0.w");
    CHECK(w0.value.dim(1) == 1);
    const nn::Param& w1 = guard_net.params().get(base + ".offset1.w");
    CHECK(w1.value.dim(0) == 18);  // (dy,dx) per tap of a 3x3 kernel
    // offset head starts at zero: DistortionGuard reduces to a plain conv
    for (int64_t i = 0; i < w1.value.size(); ++i) CHECK(w1.value[i] == 0.0);
  }

  model::ModelConfig off;
  off.guard = false;
  off.ftb = false;
  model::Vfi360Net plain(off);
  for (const nn::Param& p : plain.params().params()) {
    CHECK(p.name.find("offset") == std::string::npos);
    CHECK(p.name.find("dft") == std::string::npos);
  }
}

TEST_CASE("initialization: pure mask blend of the two inputs") {
  model::Vfi360Net net;
  const Tensor i1 = random_frame(32, 64, 5);
  const Tensor i2 = random_frame(32, 64, 6);
  const Tensor out = net.interpolate(i1, i2);
  REQUIRE(out.shape() == i1.shape());
  // zero flows, sigmoid(0)=0.5 mask, zero residual -> plain average
  double m = 0.0;
  for (int64_t i = 0; i < out.size(); ++i)
    m = std::max(m, std::fabs(out[i] - 0.5 * (i1[i] + i2[i])));
  CHECK(m < 1e-9);
}

TEST_CASE("initial flows are zero before any residual is learned") {
  model::Vfi360Net net;
  ad::Tape t(false);
  ad::NodePtr a = t.leaf(random_frame(32, 64, 7));
  ad::NodePtr b = t.leaf(random_frame(32, 64, 8));
  const model::ForwardResult r = net.forward(t, a, b);
  REQUIRE(r.finest.flow->value.shape() == std::vector<int>{4, 16, 32});
  for (int64_t i = 0; i < r.finest.flow->value.size(); ++i) CHECK(r.finest.flow->value[i] == 0.0);
  REQUIRE(r.finest.residual->value.shape() == std::vector<int>{3, 16, 32});
  for (int64_t i = 0; i < r.finest.residual->value.size(); ++i)
    CHECK(r.finest.residual->value[i] == 0.0);
}

TEST_CASE("constant inputs reproduce the constant") {
  model::Vfi360Net net;
  Tensor c({3, 32, 64});
  c.fill(0.42);
  const Tensor out = net.interpolate(c, c);
  double m = 0.0;
  for (int64_t i = 0; i < out.size(); ++i) m = std::max(m, std::fabs(out[i] - 0.42));
  CHECK(m < 1e-9);
}

TEST_CASE("forward shape contract at 2:1 aspect") {
  for (int H : {64, 128}) {
    model::Vfi360Net net;
    const Tensor i1 = random_frame(H, 2 * H, 10 + static_cast<uint64_t>(H));
    const Tensor i2 = random_frame(H, 2 * H, 20 + static_cast<uint64_t>(H));
    const Tensor out = net.interpolate(i1, i2);
    CHECK(out.shape() == std::vector<int>{3, H, 2 * H});
    for (int64_t i = 0; i < out.size(); ++i) {
      CHECK(out[i] >= 0.0);
      CHECK(out[i] <= 1.0);
    }
  }
}

TEST_CASE("inference is deterministic") {
  model::Vfi360Net net;
  const Tensor i1 = random_frame(32, 64, 11);
  const Tensor i2 = random_frame(32, 64, 12);
  const Tensor a = net.interpolate(i1, i2);
  const Tensor b = net.interpolate(i1, i2);
  for (int64_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("seeded construction is reproducible and seed-sensitive") {
  model::Vfi360Net n1({}, 77), n2({}, 77), n3({}, 78);
  const Tensor i1 = random_frame(32, 64, 13);
  const Tensor i2 = random_frame(32, 64, 14);
  const Tensor a = n1.interpolate(i1, i2);
  const Tensor b = n2.interpolate(i1, i2);
  for (int64_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  // zero-initialized heads make the *output* seed-independent at init, so
  // seed sensitivity shows up in the weights, not the blend
  const Tensor& w77 = n1.params().get("enc.l1.feat.w").value;
  const Tensor& w78 = n3.params().get("enc.l1.feat.w").value;
  CHECK(max_abs_diff(w77, w78) > 0.0);
}

TEST_CASE("encoder pyramid is vertical-flip equivariant with flipped kernels") {
  // Flipping the frame, the (symmetric) prior and every encoder kernel's rows
  // must flip the pyramid exactly; the k=2 s=2 downsampler keeps this exact
  // for even heights.
  model::Vfi360Net a({}, 55), b({}, 55);
  for (nn::Param& p : b.params().params()) {
    if (p.name.rfind("enc.", 0) == 0 && p.value.ndim() == 4 &&
        p.name.find("offset") == std::string::npos) {
      vflip_kernel(p.value);
    }
  }
  const Tensor frame = random_frame(32, 32, 15);
  ad::Tape t(false);
  const std::vector<ad::NodePtr> pyr = a.extract_pyramid(t, t.leaf(frame));
  const std::vector<ad::NodePtr> pyr_flipped = b.extract_pyramid(t, t.leaf(vflip_image(frame)));
  REQUIRE(pyr.size() == pyr_flipped.size());
  for (size_t l = 0; l < pyr.size(); ++l) {
    CHECK(max_abs_diff(vflip_image(pyr[l]->value), pyr_flipped[l]->value) < 1e-12);
  }
}

TEST_CASE("parameter count ordering across ablations") {
  const int64_t both_off = model::count_parameters(false, false);
  const int64_t guard_only = model::count_parameters(true, false);
  const int64_t ftb_only = model::count_parameters(false, true);
  const int64_t both_on = model::count_parameters(true, true);
  CHECK(both_on > guard_only);
  CHECK(both_on > ftb_only);
  CHECK(both_off < guard_only);
  CHECK(both_off < ftb_only);
}

TEST_CASE("checkpoint round-trip and flag mismatch refusal") {
  const std::string path = "model_test.ckpt";
  model::Vfi360Net net({}, 99);
  checkpoint::Meta meta;
  meta.iteration = 42;
  meta.config_fingerprint = "abc";
  checkpoint::save(net, meta, path, /*include_optimizer_state=*/false);

  SUBCASE("round trip preserves behaviour and metadata") {
    model::Vfi360Net fresh(checkpoint::peek_config(path), 1);
    const checkpoint::Loaded loaded = checkpoint::load(path, &fresh);
    CHECK(loaded.meta.iteration == 42);
    CHECK(loaded.meta.config_fingerprint == "abc");
    CHECK_FALSE(loaded.meta.has_optimizer_state);
    const Tensor i1 = random_frame(32, 64, 16);
    const Tensor i2 = random_frame(32, 64, 17);
    const Tensor a = net.interpolate(i1, i2);
    const Tensor b = fresh.interpolate(i1, i2);
    for (int64_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
  SUBCASE("ablation flag mismatch refuses to load") {
    model::ModelConfig other;
    other.guard = false;
    model::Vfi360Net wrong(other);
    CHECK_THROWS(checkpoint::load(path, &wrong));
  }
  std::remove(path.c_str());
}

TEST_CASE("input validation") {
  model::Vfi360Net net;
  Tensor ok({3, 32, 64}), small({3, 30, 64}), gray({1, 32, 64});
  ok.fill(0.5);
  small.fill(0.5);
  gray.fill(0.5);
  CHECK_THROWS_AS(net.interpolate(ok, small), std::invalid_argument);
  CHECK_THROWS_AS(net.interpolate(small, small), std::invalid_argument);
  CHECK_THROWS_AS(net.interpolate(gray, gray), std::invalid_argument);
}
