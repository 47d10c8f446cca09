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

#include "vfi360/model.hpp"

#include <cmath>

#include "vfi360/erp_geometry.hpp"

namespace vfi360::model {

namespace {

constexpr int kOffsetHidden = 16;
constexpr int kDftHidden = 16;

std::string lname(const char* stage, int level, const char* part) {
  return std::string(stage) + ".l" + std::to_string(level) + "." + part;
}

}  // namespace

ad::NodePtr dft_apply(ad::Tape& t, const ad::NodePtr& f, const ad::NodePtr& alpha,
                      const ad::NodePtr& beta_shift) {
  check_same_shape(f->value, alpha->value, "dft_apply");
  check_same_shape(f->value, beta_shift->value, "dft_apply");
  return ad::add(t, ad::mul(t, alpha, f), beta_shift);
}

Vfi360Net::Vfi360Net(ModelConfig cfg, uint64_t seed) : cfg_(std::move(cfg)) {
  if (cfg_.levels < 1 || static_cast<int>(cfg_.channels.size()) != cfg_.levels) {
    throw std::invalid_argument("Vfi360Net: channel schedule must list one width per level");
  }
  std::mt19937_64 rng(seed);
  auto conv_param = [&](const std::string& name, int cout, int cin, int k, bool zero_init) {
    nn::Param& w = store_.create(name + ".w", {cout, cin, k, k});
    if (!zero_init) nn::init_fan_in_uniform(w.value, rng);
    store_.create(name + ".b", {cout});
  };

  const int L = cfg_.levels;
  for (int l = 1; l <= L; ++l) {
    const int c = cfg_.channels[static_cast<size_t>(l - 1)];
    const int cprev = l == 1 ? 3 : cfg_.channels[static_cast<size_t>(l - 2)];
    conv_param(lname("enc", l, "down"), c, cprev, 2, false);
    if (cfg_.guard) {
      conv_param(lname("enc", l, "offset0"), kOffsetHidden, 1, 3, false);
      conv_param(lname("enc", l, "offset1"), 18, kOffsetHidden, 3, true);  // start as plain conv
    }
    conv_param(lname("enc", l, "feat"), c, c, 3, false);
    conv_param(lname("enc", l, "post0"), c, c, 3, false);
    conv_param(lname("enc", l, "post1"), c, c, 3, false);
  }
  for (int l = L; l >= 1; --l) {
    const int c = cfg_.channels[static_cast<size_t>(l - 1)];
    const int cup = l == L ? 0 : cfg_.channels[static_cast<size_t>(l)];
    const int cin = 2 * c + 5 + cup;  // warped features + flows + mask logit (+ carried feature)
    conv_param(lname("dec", l, "fuse"), c, cin, 3, false);
    for (int j = 0; j < 2; ++j) {
      conv_param(lname("dec", l, ("body" + std::to_string(j)).c_str()), c, c, 3, false);
      if (cfg_.ftb) {
        const std::string dft = "dft" + std::to_string(j);
        conv_param(lname("dec", l, (dft + ".hid").c_str()), kDftHidden, 1, 1, false);
        conv_param(lname("dec", l, (dft + ".alpha").c_str()), c, kDftHidden, 1, true);
        conv_param(lname("dec", l, (dft + ".beta").c_str()), c, kDftHidden, 1, true);
        store_.get(lname("dec", l, (dft + ".alpha").c_str()) + ".b").value.fill(1.0);
      }
    }
    conv_param(lname("dec", l, "flow"), 4, c, 3, true);
    conv_param(lname("dec", l, "mask"), 1, c, 3, true);
    if (l == 1) conv_param(lname("dec", l, "res"), 3, c, 3, true);
  }
}

ad::NodePtr Vfi360Net::cond_leaf(ad::Tape& t, int h, int w) const {
  return t.leaf(erp::condition_map(h, w).values, /*requires_grad=*/false);
}

ad::NodePtr Vfi360Net::conv(ad::Tape& t, const ad::NodePtr& x, const std::string& name,
                            int stride, int pad) {
  return ad::conv2d(t, x, store_.use(t, name + ".w"), store_.use(t, name + ".b"), stride, pad);
}

ad::NodePtr Vfi360Net::offset_field(ad::Tape& t, int level, const ad::NodePtr& cond) {
  ad::NodePtr h = ad::leaky_relu(t, conv(t, cond, lname("enc", level, "offset0"), 1, 1));
  return conv(t, h, lname("enc", level, "offset1"), 1, 1);
}

std::vector<ad::NodePtr> Vfi360Net::extract_pyramid(ad::Tape& t, const ad::NodePtr& frame) {
  const int H = frame->value.dim(1), W = frame->value.dim(2);
  if (H % (1 << cfg_.levels) != 0 || W % (1 << cfg_.levels) != 0) {
    throw std::invalid_argument("extract_pyramid: dims must be divisible by 2^levels");
  }
  std::vector<ad::NodePtr> levels;
  ad::NodePtr x = frame;
  for (int l = 1; l <= cfg_.levels; ++l) {
    x = ad::leaky_relu(t, conv(t, x, lname("enc", l, "down"), 2, 0));
    if (cfg_.guard) {
      const ad::NodePtr cond = cond_leaf(t, x->value.dim(1), x->value.dim(2));
      const ad::NodePtr off = offset_field(t, l, cond);
      x = ad::leaky_relu(t, ad::deform_conv2d(t, x, off, store_.use(t, lname("enc", l, "feat") + ".w"),
                                              store_.use(t, lname("enc", l, "feat") + ".b")));
    } else {
      x = ad::leaky_relu(t, conv(t, x, lname("enc", l, "feat"), 1, 1));
    }
    x = ad::leaky_relu(t, conv(t, x, lname("enc", l, "post0"), 1, 1));
    x = ad::leaky_relu(t, conv(t, x, lname("enc", l, "post1"), 1, 1));
    levels.push_back(x);
  }
  return levels;
}

LevelState Vfi360Net::decode_level(ad::Tape& t, int level, const ad::NodePtr& phi0,
                                   const ad::NodePtr& phi1,
                                   const std::optional<LevelState>& prev) {
  check_same_shape(phi0->value, phi1->value, "decode_level");
  const int c = cfg_.channels[static_cast<size_t>(level - 1)];
  if (phi0->value.dim(0) != c) {
    throw std::invalid_argument("decode_level: feature width does not match level");
  }
  const int h = phi0->value.dim(1), w = phi0->value.dim(2);

  ad::NodePtr flow, mask_logit;
  std::vector<ad::NodePtr> inputs;
  if (prev) {
    flow = prev->flow;
    mask_logit = prev->mask_logit;
    if (flow->value.dim(1) != h || flow->value.dim(2) != w) {
      throw std::invalid_argument("decode_level: prev state not at this level's resolution");
    }
  } else {
    flow = t.leaf(Tensor({4, h, w}));
    mask_logit = t.leaf(Tensor({1, h, w}));
  }
  const ad::NodePtr f01 = ad::slice_channels(t, flow, 0, 2);
  const ad::NodePtr f02 = ad::slice_channels(t, flow, 2, 2);
  inputs.push_back(ad::warp_bilinear(t, phi0, f01));
  inputs.push_back(ad::warp_bilinear(t, phi1, f02));
  if (prev && prev->feat) inputs.push_back(prev->feat);
  inputs.push_back(flow);
  inputs.push_back(mask_logit);

  ad::NodePtr x = ad::leaky_relu(t, conv(t, ad::concat_channels(t, inputs), lname("dec", level, "fuse"), 1, 1));
  ad::NodePtr cond;
  if (cfg_.ftb) cond = cond_leaf(t, h, w);
  for (int j = 0; j < 2; ++j) {
    x = conv(t, x, lname("dec", level, ("body" + std::to_string(j)).c_str()), 1, 1);
    if (cfg_.ftb) {
      const std::string dft = "dft" + std::to_string(j);
      ad::NodePtr hid = ad::leaky_relu(t, conv(t, cond, lname("dec", level, (dft + ".hid").c_str()), 1, 0));
      ad::NodePtr alpha = conv(t, hid, lname("dec", level, (dft + ".alpha").c_str()), 1, 0);
      ad::NodePtr beta = conv(t, hid, lname("dec", level, (dft + ".beta").c_str()), 1, 0);
      x = dft_apply(t, x, alpha, beta);
    }
    x = ad::leaky_relu(t, x);
  }

  LevelState out;
  out.flow = ad::add(t, flow, conv(t, x, lname("dec", level, "flow"), 1, 1));
  out.mask_logit = ad::add(t, mask_logit, conv(t, x, lname("dec", level, "mask"), 1, 1));
  out.feat = x;
  if (level == 1) out.residual = conv(t, x, lname("dec", level, "res"), 1, 1);
  return out;
}

void Vfi360Net::check_input(const Tensor& i1, const Tensor& i2) const {
  check_same_shape(i1, i2, "interpolate");
  if (i1.ndim() != 3 || i1.dim(0) != 3) throw std::invalid_argument("interpolate: frames must be {3,H,W}");
  const int div = 1 << cfg_.levels;
  if (i1.dim(1) % div != 0 || i1.dim(2) % div != 0) {
    throw std::invalid_argument("interpolate: dims must be divisible by 2^levels");
  }
}

ForwardResult Vfi360Net::forward(ad::Tape& t, const ad::NodePtr& i1, const ad::NodePtr& i2) {
  check_input(i1->value, i2->value);
  const std::vector<ad::NodePtr> pyr0 = extract_pyramid(t, i1);
  const std::vector<ad::NodePtr> pyr1 = extract_pyramid(t, i2);

  std::optional<LevelState> state;
  for (int l = cfg_.levels; l >= 1; --l) {
    LevelState s = decode_level(t, l, pyr0[static_cast<size_t>(l - 1)],
                                pyr1[static_cast<size_t>(l - 1)], state);
    if (l > 1) {
      LevelState up;
      up.flow = ad::scale(t, ad::upsample2x(t, s.flow), 2.0);
      up.mask_logit = ad::upsample2x(t, s.mask_logit);
      up.feat = ad::upsample2x(t, s.feat);
      state = up;
    } else {
      state = s;
    }
  }

  // Level 1 lives at half input resolution; lift flows, mask and residual to
  // full resolution for synthesis.
  const LevelState& fin = *state;
  ad::NodePtr flow_full = ad::scale(t, ad::upsample2x(t, fin.flow), 2.0);
  ad::NodePtr mask = ad::sigmoid(t, ad::upsample2x(t, fin.mask_logit));
  ad::NodePtr res_full = ad::upsample2x(t, fin.residual);

  ad::NodePtr w1 = ad::warp_bilinear(t, i1, ad::slice_channels(t, flow_full, 0, 2));
  ad::NodePtr w2 = ad::warp_bilinear(t, i2, ad::slice_channels(t, flow_full, 2, 2));
  const int H = i1->value.dim(1), W = i1->value.dim(2);
  ad::NodePtr ones = t.leaf(Tensor({1, H, W}, 1.0));
  ad::NodePtr mask3 = ad::concat_channels(t, {mask, mask, mask});
  ad::NodePtr inv3 = ad::sub(t, ad::concat_channels(t, {ones, ones, ones}), mask3);
  ad::NodePtr blend = ad::add(t, ad::mul(t, mask3, w1), ad::mul(t, inv3, w2));
  ForwardResult r;
  r.pred = ad::clamp01(t, ad::add(t, blend, res_full));
  r.finest = fin;
  return r;
}

Tensor Vfi360Net::interpolate(const Tensor& i1, const Tensor& i2) {
  ad::Tape tape(/*grad_enabled=*/false);
  const ad::NodePtr a = tape.leaf(i1);
  const ad::NodePtr b = tape.leaf(i2);
  return forward(tape, a, b).pred->value;
}

int64_t count_parameters(bool guard, bool ftb) {
  ModelConfig cfg;
  cfg.guard = guard;
  cfg.ftb = ftb;
  return Vfi360Net(cfg).parameter_count();
}

}  // namespace vfi360::model
