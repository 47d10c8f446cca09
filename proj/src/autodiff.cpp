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

#include "vfi360/autodiff.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace vfi360::ad {

namespace {
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;
}  // namespace

void ensure_grad(const NodePtr& n) {
  if (n->grad.empty()) n->grad = Tensor::zeros_like(n->value);
}

NodePtr Tape::leaf(Tensor value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = grad_enabled_ && requires_grad;
  n->order = nodes_.size();
  nodes_.push_back(n);
  return n;
}

NodePtr Tape::make(Tensor value, std::vector<NodePtr> parents,
                   std::function<void(Node&)> backprop) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (grad_enabled_) {
    for (const auto& p : parents) {
      if (p->requires_grad) {
        n->requires_grad = true;
        break;
      }
    }
    if (n->requires_grad) {
      n->parents = std::move(parents);
      n->backprop = std::move(backprop);
    }
  }
  n->order = nodes_.size();
  nodes_.push_back(n);
  return n;
}

void Tape::backward(const NodePtr& root) {
  if (!grad_enabled_) throw std::logic_error("Tape::backward on a no-grad tape");
  if (root->value.size() != 1) throw std::invalid_argument("Tape::backward: root must be scalar");
  ensure_grad(root);
  root->grad[0] += 1.0;
  for (size_t i = root->order + 1; i-- > 0;) {
    Node& n = *nodes_[i];
    if (!n.grad.empty() && n.backprop) n.backprop(n);
  }
}

// ---------------------------------------------------------------------------
// Elementwise ops

NodePtr add(Tape& t, const NodePtr& a, const NodePtr& b) {
  check_same_shape(a->value, b->value, "add");
  Tensor out = Tensor::zeros_like(a->value);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] + b->value[i];
  return t.make(std::move(out), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) {
      ensure_grad(a);
      for (int64_t i = 0; i < self.grad.size(); ++i) a->grad[i] += self.grad[i];
    }
    if (b->requires_grad) {
      ensure_grad(b);
      for (int64_t i = 0; i < self.grad.size(); ++i) b->grad[i] += self.grad[i];
    }
  });
}

NodePtr sub(Tape& t, const NodePtr& a, const NodePtr& b) {
  check_same_shape(a->value, b->value, "sub");
  Tensor out = Tensor::zeros_like(a->value);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] - b->value[i];
  return t.make(std::move(out), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) {
      ensure_grad(a);
      for (int64_t i = 0; i < self.grad.size(); ++i) a->grad[i] += self.grad[i];
    }
    if (b->requires_grad) {
      ensure_grad(b);
      for (int64_t i = 0; i < self.grad.size(); ++i) b->grad[i] -= self.grad[i];
    }
  });
}

NodePtr mul(Tape& t, const NodePtr& a, const NodePtr& b) {
  check_same_shape(a->value, b->value, "mul");
  Tensor out = Tensor::zeros_like(a->value);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * b->value[i];
  return t.make(std::move(out), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) {
      ensure_grad(a);
      for (int64_t i = 0; i < self.grad.size(); ++i) a->grad[i] += self.grad[i] * b->value[i];
    }
    if (b->requires_grad) {
      ensure_grad(b);
      for (int64_t i = 0; i < self.grad.size(); ++i) b->grad[i] += self.grad[i] * a->value[i];
    }
  });
}

NodePtr scale(Tape& t, const NodePtr& a, double s) {
  Tensor out = Tensor::zeros_like(a->value);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * s;
  return t.make(std::move(out), {a}, [a, s](Node& self) {
    if (!a->requires_grad) return;
    ensure_grad(a);
    for (int64_t i = 0; i < self.grad.size(); ++i) a->grad[i] += self.grad[i] * s;
  });
}

NodePtr leaky_relu(Tape& t, const NodePtr& a, double slope) {
  Tensor out = Tensor::zeros_like(a->value);
  for (int64_t i = 0; i < out.size(); ++i) {
    const double v = a->value[i];
    out[i] = v >= 0.0 ? v : slope * v;
  }
  return t.make(std::move(out), {a}, [a, slope](Node& self) {
    if (!a->requires_grad) return;
    ensure_grad(a);
    for (int64_t i = 0; i < self.grad.size(); ++i) {
      a->grad[i] += self.grad[i] * (a->value[i] >= 0.0 ? 1.0 : slope);
    }
  });
}

NodePtr sigmoid(Tape& t, const NodePtr& a) {
  Tensor out = Tensor::zeros_like(a->value);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-a->value[i]));
  return t.make(std::move(out), {a}, [a](Node& self) {
    if (!a->requires_grad) return;
    ensure_grad(a);
    for (int64_t i = 0; i < self.grad.size(); ++i) {
      const double s = self.value[i];
      a->grad[i] += self.grad[i] * s * (1.0 - s);
    }
  });
}

NodePtr clamp01(Tape& t, const NodePtr& a) {
  Tensor out = Tensor::zeros_like(a->value);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::min(1.0, std::max(0.0, a->value[i]));
  return t.make(std::move(out), {a}, [a](Node& self) {
    if (!a->requires_grad) return;
    ensure_grad(a);
    for (int64_t i = 0; i < self.grad.size(); ++i) {
      const double v = a->value[i];
      if (v >= 0.0 && v <= 1.0) a->grad[i] += self.grad[i];
    }
  });
}

// ---------------------------------------------------------------------------
// Channel ops

NodePtr concat_channels(Tape& t, const std::vector<NodePtr>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_channels: empty input");
  const int H = parts[0]->value.dim(1), W = parts[0]->value.dim(2);
  int C = 0;
  for (const auto& p : parts) {
    if (p->value.ndim() != 3 || p->value.dim(1) != H || p->value.dim(2) != W) {
      throw std::invalid_argument("concat_channels: spatial shape mismatch");
    }
    C += p->value.dim(0);
  }
  Tensor out({C, H, W});
  int64_t off = 0;
  for (const auto& p : parts) {
    const int64_t n = p->value.size();
    std::copy(p->value.data(), p->value.data() + n, out.data() + off);
    off += n;
  }
  return t.make(std::move(out), parts, [parts](Node& self) {
    int64_t off = 0;
    for (const auto& p : parts) {
      const int64_t n = p->value.size();
      if (p->requires_grad) {
        ensure_grad(p);
        for (int64_t i = 0; i < n; ++i) p->grad[i] += self.grad[off + i];
      }
      off += n;
    }
  });
}

NodePtr slice_channels(Tape& t, const NodePtr& a, int from, int count) {
  const int C = a->value.dim(0), H = a->value.dim(1), W = a->value.dim(2);
  if (from < 0 || count < 1 || from + count > C) {
    throw std::invalid_argument("slice_channels: range out of bounds");
  }
  const int64_t plane = static_cast<int64_t>(H) * W;
  Tensor out({count, H, W});
  std::copy(a->value.data() + from * plane, a->value.data() + (from + count) * plane, out.data());
  return t.make(std::move(out), {a}, [a, from, plane](Node& self) {
    if (!a->requires_grad) return;
    ensure_grad(a);
    for (int64_t i = 0; i < self.grad.size(); ++i) a->grad[from * plane + i] += self.grad[i];
  });
}

// ---------------------------------------------------------------------------
// Convolution (im2col + GEMM)

namespace {

struct ConvDims {
  int Cin, H, W, Cout, kh, kw, OH, OW;
};

ConvDims conv_dims(const Tensor& x, const Tensor& w, int stride, int pad) {
  if (x.ndim() != 3 || w.ndim() != 4) throw std::invalid_argument("conv2d: bad ranks");
  if (w.dim(1) != x.dim(0)) throw std::invalid_argument("conv2d: channel mismatch");
  ConvDims d;
  d.Cin = x.dim(0);
  d.H = x.dim(1);
  d.W = x.dim(2);
  d.Cout = w.dim(0);
  d.kh = w.dim(2);
  d.kw = w.dim(3);
  d.OH = (d.H + 2 * pad - d.kh) / stride + 1;
  d.OW = (d.W + 2 * pad - d.kw) / stride + 1;
  if (d.OH < 1 || d.OW < 1) throw std::invalid_argument("conv2d: output collapses");
  return d;
}

void im2col(const Tensor& x, const ConvDims& d, int stride, int pad, std::vector<double>& cols) {
  const int K = d.Cin * d.kh * d.kw;
  const int64_t P = static_cast<int64_t>(d.OH) * d.OW;
  cols.assign(static_cast<size_t>(K) * P, 0.0);
  for (int ci = 0; ci < d.Cin; ++ci) {
    for (int ky = 0; ky < d.kh; ++ky) {
      for (int kx = 0; kx < d.kw; ++kx) {
        const int row = (ci * d.kh + ky) * d.kw + kx;
        double* dst = cols.data() + static_cast<int64_t>(row) * P;
        for (int oy = 0; oy < d.OH; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= d.H) continue;
          for (int ox = 0; ox < d.OW; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix < 0 || ix >= d.W) continue;
            dst[static_cast<int64_t>(oy) * d.OW + ox] = x.at(ci, iy, ix);
          }
        }
      }
    }
  }
}

void col2im_accum(const std::vector<double>& cols, const ConvDims& d, int stride, int pad,
                  Tensor& dx) {
  const int64_t P = static_cast<int64_t>(d.OH) * d.OW;
  for (int ci = 0; ci < d.Cin; ++ci) {
    for (int ky = 0; ky < d.kh; ++ky) {
      for (int kx = 0; kx < d.kw; ++kx) {
        const int row = (ci * d.kh + ky) * d.kw + kx;
        const double* src = cols.data() + static_cast<int64_t>(row) * P;
        for (int oy = 0; oy < d.OH; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= d.H) continue;
          for (int ox = 0; ox < d.OW; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix < 0 || ix >= d.W) continue;
            dx.at(ci, iy, ix) += src[static_cast<int64_t>(oy) * d.OW + ox];
          }
        }
      }
    }
  }
}

}  // namespace

NodePtr conv2d(Tape& t, const NodePtr& x, const NodePtr& w, const NodePtr& b, int stride,
               int pad) {
  const ConvDims d = conv_dims(x->value, w->value, stride, pad);
  if (b->value.ndim() != 1 || b->value.dim(0) != d.Cout) {
    throw std::invalid_argument("conv2d: bias shape mismatch");
  }
  const int K = d.Cin * d.kh * d.kw;
  const int64_t P = static_cast<int64_t>(d.OH) * d.OW;
  std::vector<double> cols;
  im2col(x->value, d, stride, pad, cols);
  Tensor out({d.Cout, d.OH, d.OW});
  {
    CMapMat Wm(w->value.data(), d.Cout, K);
    CMapMat Cm(cols.data(), K, P);
    MapMat Ym(out.data(), d.Cout, P);
    Ym.noalias() = Wm * Cm;
    for (int co = 0; co < d.Cout; ++co) Ym.row(co).array() += b->value[co];
  }
  return t.make(std::move(out), {x, w, b}, [x, w, b, d, stride, pad, K, P](Node& self) {
    CMapMat dYm(self.grad.data(), d.Cout, P);
    if (w->requires_grad || b->requires_grad) {
      std::vector<double> cols;
      im2col(x->value, d, stride, pad, cols);
      CMapMat Cm(cols.data(), K, P);
      if (w->requires_grad) {
        ensure_grad(w);
        MapMat dWm(w->grad.data(), d.Cout, K);
        dWm.noalias() += dYm * Cm.transpose();
      }
      if (b->requires_grad) {
        ensure_grad(b);
        for (int co = 0; co < d.Cout; ++co) b->grad[co] += dYm.row(co).sum();
      }
    }
    if (x->requires_grad) {
      ensure_grad(x);
      std::vector<double> dcols(static_cast<size_t>(K) * P);
      CMapMat Wm(w->value.data(), d.Cout, K);
      MapMat dCm(dcols.data(), K, P);
      dCm.noalias() = Wm.transpose() * dYm;
      col2im_accum(dcols, d, stride, pad, x->grad);
    }
  });
}

// ---------------------------------------------------------------------------
// Deformable 3x3 convolution

namespace {

struct TapSample {
  // bilinear corners; idx < 0 marks out-of-bounds (reads zero)
  int i00 = -1, i01 = -1, i10 = -1, i11 = -1;
  double w00 = 0, w01 = 0, w10 = 0, w11 = 0;
  double fy = 0, fx = 0;
  int y0 = 0, x0 = 0;
};

inline TapSample tap_sample(double py, double px, int H, int W) {
  TapSample s;
  const double fy0 = std::floor(py), fx0 = std::floor(px);
  const int y0 = static_cast<int>(fy0), x0 = static_cast<int>(fx0);
  s.fy = py - fy0;
  s.fx = px - fx0;
  s.y0 = y0;
  s.x0 = x0;
  const int y1 = y0 + 1, x1 = x0 + 1;
  const bool vy0 = y0 >= 0 && y0 < H, vy1 = y1 >= 0 && y1 < H;
  const bool vx0 = x0 >= 0 && x0 < W, vx1 = x1 >= 0 && x1 < W;
  if (vy0 && vx0) s.i00 = y0 * W + x0;
  if (vy0 && vx1) s.i01 = y0 * W + x1;
  if (vy1 && vx0) s.i10 = y1 * W + x0;
  if (vy1 && vx1) s.i11 = y1 * W + x1;
  s.w00 = (1 - s.fy) * (1 - s.fx);
  s.w01 = (1 - s.fy) * s.fx;
  s.w10 = s.fy * (1 - s.fx);
  s.w11 = s.fy * s.fx;
  return s;
}

}  // namespace

NodePtr deform_conv2d(Tape& t, const NodePtr& x, const NodePtr& offsets, const NodePtr& w,
                      const NodePtr& b) {
  const Tensor& xv = x->value;
  const Tensor& ov = offsets->value;
  const Tensor& wv = w->value;
  if (xv.ndim() != 3 || wv.ndim() != 4 || wv.dim(2) != 3 || wv.dim(3) != 3) {
    throw std::invalid_argument("deform_conv2d: expects {Cin,H,W} input and 3x3 kernel");
  }
  const int Cin = xv.dim(0), H = xv.dim(1), W = xv.dim(2), Cout = wv.dim(0);
  if (wv.dim(1) != Cin) throw std::invalid_argument("deform_conv2d: channel mismatch");
  if (ov.ndim() != 3 || ov.dim(0) != 18 || ov.dim(1) != H || ov.dim(2) != W) {
    throw std::invalid_argument("deform_conv2d: offsets must be {18,H,W}");
  }
  const int64_t plane = static_cast<int64_t>(H) * W;
  Tensor out({Cout, H, W});
  std::vector<double> v(static_cast<size_t>(Cin) * 9);
  for (int oy = 0; oy < H; ++oy) {
    for (int ox = 0; ox < W; ++ox) {
      TapSample taps[9];
      for (int k = 0; k < 9; ++k) {
        const int ky = k / 3 - 1, kx = k % 3 - 1;
        const double py = oy + ky + ov.at(2 * k, oy, ox);
        const double px = ox + kx + ov.at(2 * k + 1, oy, ox);
        taps[k] = tap_sample(py, px, H, W);
      }
      for (int ci = 0; ci < Cin; ++ci) {
        const double* plane_x = xv.data() + ci * plane;
        for (int k = 0; k < 9; ++k) {
          const TapSample& s = taps[k];
          double val = 0.0;
          if (s.i00 >= 0) val += s.w00 * plane_x[s.i00];
          if (s.i01 >= 0) val += s.w01 * plane_x[s.i01];
          if (s.i10 >= 0) val += s.w10 * plane_x[s.i10];
          if (s.i11 >= 0) val += s.w11 * plane_x[s.i11];
          v[static_cast<size_t>(ci) * 9 + k] = val;
        }
      }
      for (int co = 0; co < Cout; ++co) {
        const double* wrow = wv.data() + static_cast<int64_t>(co) * Cin * 9;
        double acc = b->value[co];
        for (size_t i = 0; i < v.size(); ++i) acc += wrow[i] * v[i];
        out.at(co, oy, ox) = acc;
      }
    }
  }
  return t.make(std::move(out), {x, offsets, w, b},
                [x, offsets, w, b, Cin, H, W, Cout, plane](Node& self) {
    const Tensor& xv = x->value;
    const Tensor& ov = offsets->value;
    const Tensor& wv = w->value;
    if (x->requires_grad) ensure_grad(x);
    if (offsets->requires_grad) ensure_grad(offsets);
    if (w->requires_grad) ensure_grad(w);
    if (b->requires_grad) ensure_grad(b);
    std::vector<double> v(static_cast<size_t>(Cin) * 9), g(v.size());
    for (int oy = 0; oy < H; ++oy) {
      for (int ox = 0; ox < W; ++ox) {
        TapSample taps[9];
        for (int k = 0; k < 9; ++k) {
          const int ky = k / 3 - 1, kx = k % 3 - 1;
          const double py = oy + ky + ov.at(2 * k, oy, ox);
          const double px = ox + kx + ov.at(2 * k + 1, oy, ox);
          taps[k] = tap_sample(py, px, H, W);
        }
        for (int ci = 0; ci < Cin; ++ci) {
          const double* plane_x = xv.data() + ci * plane;
          for (int k = 0; k < 9; ++k) {
            const TapSample& s = taps[k];
            double val = 0.0;
            if (s.i00 >= 0) val += s.w00 * plane_x[s.i00];
            if (s.i01 >= 0) val += s.w01 * plane_x[s.i01];
            if (s.i10 >= 0) val += s.w10 * plane_x[s.i10];
            if (s.i11 >= 0) val += s.w11 * plane_x[s.i11];
            v[static_cast<size_t>(ci) * 9 + k] = val;
          }
        }
        std::fill(g.begin(), g.end(), 0.0);
        for (int co = 0; co < Cout; ++co) {
          const double gy = self.grad.at(co, oy, ox);
          if (gy == 0.0) continue;
          const double* wrow = wv.data() + static_cast<int64_t>(co) * Cin * 9;
          if (b->requires_grad) b->grad[co] += gy;
          if (w->requires_grad) {
            double* dwrow = w->grad.data() + static_cast<int64_t>(co) * Cin * 9;
            for (size_t i = 0; i < v.size(); ++i) dwrow[i] += gy * v[i];
          }
          for (size_t i = 0; i < g.size(); ++i) g[i] += gy * wrow[i];
        }
        for (int ci = 0; ci < Cin; ++ci) {
          const double* plane_x = xv.data() + ci * plane;
          double* plane_dx = x->requires_grad ? x->grad.data() + ci * plane : nullptr;
          for (int k = 0; k < 9; ++k) {
            const double gv = g[static_cast<size_t>(ci) * 9 + k];
            if (gv == 0.0) continue;
            const TapSample& s = taps[k];
            if (plane_dx) {
              if (s.i00 >= 0) plane_dx[s.i00] += gv * s.w00;
              if (s.i01 >= 0) plane_dx[s.i01] += gv * s.w01;
              if (s.i10 >= 0) plane_dx[s.i10] += gv * s.w10;
              if (s.i11 >= 0) plane_dx[s.i11] += gv * s.w11;
            }
            if (offsets->requires_grad) {
              const double v00 = s.i00 >= 0 ? plane_x[s.i00] : 0.0;
              const double v01 = s.i01 >= 0 ? plane_x[s.i01] : 0.0;
              const double v10 = s.i10 >= 0 ? plane_x[s.i10] : 0.0;
              const double v11 = s.i11 >= 0 ? plane_x[s.i11] : 0.0;
              const double dpy = (1 - s.fx) * (v10 - v00) + s.fx * (v11 - v01);
              const double dpx = (1 - s.fy) * (v01 - v00) + s.fy * (v11 - v10);
              offsets->grad.at(2 * k, oy, ox) += gv * dpy;
              offsets->grad.at(2 * k + 1, oy, ox) += gv * dpx;
            }
          }
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Backward warping (horizontal wrap, vertical clamp)

namespace {

struct WarpSample {
  int y0, y1, x0, x1;
  double fy, fx;
  bool y_clamped;
};

inline WarpSample warp_sample(double py, double px, int H, int W) {
  WarpSample s;
  s.y_clamped = false;
  if (py <= 0.0) {
    py = 0.0;
    s.y_clamped = true;
  } else if (py >= H - 1) {
    py = H - 1;
    s.y_clamped = true;
  }
  px = std::fmod(px, static_cast<double>(W));
  if (px < 0.0) px += W;
  if (px >= W) px = 0.0;  // guard fmod edge case
  const int y0 = static_cast<int>(py);
  s.y0 = y0;
  s.y1 = std::min(y0 + 1, H - 1);
  s.fy = py - y0;
  const int x0 = static_cast<int>(px);
  s.x0 = x0;
  s.x1 = (x0 + 1) % W;
  s.fx = px - x0;
  return s;
}

}  // namespace

NodePtr warp_bilinear(Tape& t, const NodePtr& src, const NodePtr& flow) {
  const Tensor& sv = src->value;
  const Tensor& fv = flow->value;
  if (sv.ndim() != 3) throw std::invalid_argument("warp_bilinear: src must be {C,H,W}");
  const int C = sv.dim(0), H = sv.dim(1), W = sv.dim(2);
  if (fv.ndim() != 3 || fv.dim(0) != 2 || fv.dim(1) != H || fv.dim(2) != W) {
    throw std::invalid_argument("warp_bilinear: flow must be {2,H,W}");
  }
  if (!fv.all_finite()) throw std::runtime_error("warp_bilinear: non-finite flow");
  Tensor out({C, H, W});
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const WarpSample s = warp_sample(y + fv.at(1, y, x), x + fv.at(0, y, x), H, W);
      for (int c = 0; c < C; ++c) {
        out.at(c, y, x) = (1 - s.fy) * ((1 - s.fx) * sv.at(c, s.y0, s.x0) + s.fx * sv.at(c, s.y0, s.x1)) +
                          s.fy * ((1 - s.fx) * sv.at(c, s.y1, s.x0) + s.fx * sv.at(c, s.y1, s.x1));
      }
    }
  }
  return t.make(std::move(out), {src, flow}, [src, flow, C, H, W](Node& self) {
    const Tensor& sv = src->value;
    const Tensor& fv = flow->value;
    if (src->requires_grad) ensure_grad(src);
    if (flow->requires_grad) ensure_grad(flow);
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const WarpSample s = warp_sample(y + fv.at(1, y, x), x + fv.at(0, y, x), H, W);
        double gdx = 0.0, gdy = 0.0;
        for (int c = 0; c < C; ++c) {
          const double g = self.grad.at(c, y, x);
          if (g == 0.0) continue;
          if (src->requires_grad) {
            src->grad.at(c, s.y0, s.x0) += g * (1 - s.fy) * (1 - s.fx);
            src->grad.at(c, s.y0, s.x1) += g * (1 - s.fy) * s.fx;
            src->grad.at(c, s.y1, s.x0) += g * s.fy * (1 - s.fx);
            src->grad.at(c, s.y1, s.x1) += g * s.fy * s.fx;
          }
          if (flow->requires_grad) {
            const double v00 = sv.at(c, s.y0, s.x0), v01 = sv.at(c, s.y0, s.x1);
            const double v10 = sv.at(c, s.y1, s.x0), v11 = sv.at(c, s.y1, s.x1);
            gdx += g * ((1 - s.fy) * (v01 - v00) + s.fy * (v11 - v10));
            if (!s.y_clamped) gdy += g * ((1 - s.fx) * (v10 - v00) + s.fx * (v11 - v01));
          }
        }
        if (flow->requires_grad) {
          flow->grad.at(0, y, x) += gdx;
          flow->grad.at(1, y, x) += gdy;
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Bilinear x2 upsampling (half-pixel centers, border clamp)

namespace {

struct UpTap {
  int i0, i1;
  double f;
};

inline UpTap up_tap(int o, int n) {
  // source coordinate of output sample o at scale 2
  double s = (o + 0.5) / 2.0 - 0.5;
  if (s < 0) s = 0;
  if (s > n - 1) s = n - 1;
  UpTap t;
  t.i0 = static_cast<int>(s);
  t.i1 = std::min(t.i0 + 1, n - 1);
  t.f = s - t.i0;
  return t;
}

}  // namespace

NodePtr upsample2x(Tape& t, const NodePtr& a) {
  const Tensor& av = a->value;
  if (av.ndim() != 3) throw std::invalid_argument("upsample2x: expects {C,H,W}");
  const int C = av.dim(0), H = av.dim(1), W = av.dim(2);
  Tensor out({C, 2 * H, 2 * W});
  for (int oy = 0; oy < 2 * H; ++oy) {
    const UpTap ty = up_tap(oy, H);
    for (int ox = 0; ox < 2 * W; ++ox) {
      const UpTap tx = up_tap(ox, W);
      for (int c = 0; c < C; ++c) {
        out.at(c, oy, ox) =
            (1 - ty.f) * ((1 - tx.f) * av.at(c, ty.i0, tx.i0) + tx.f * av.at(c, ty.i0, tx.i1)) +
            ty.f * ((1 - tx.f) * av.at(c, ty.i1, tx.i0) + tx.f * av.at(c, ty.i1, tx.i1));
      }
    }
  }
  return t.make(std::move(out), {a}, [a, C, H, W](Node& self) {
    if (!a->requires_grad) return;
    ensure_grad(a);
    for (int oy = 0; oy < 2 * H; ++oy) {
      const UpTap ty = up_tap(oy, H);
      for (int ox = 0; ox < 2 * W; ++ox) {
        const UpTap tx = up_tap(ox, W);
        for (int c = 0; c < C; ++c) {
          const double g = self.grad.at(c, oy, ox);
          if (g == 0.0) continue;
          a->grad.at(c, ty.i0, tx.i0) += g * (1 - ty.f) * (1 - tx.f);
          a->grad.at(c, ty.i0, tx.i1) += g * (1 - ty.f) * tx.f;
          a->grad.at(c, ty.i1, tx.i0) += g * ty.f * (1 - tx.f);
          a->grad.at(c, ty.i1, tx.i1) += g * ty.f * tx.f;
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Loss node

NodePtr wss_l1_loss(Tape& t, const NodePtr& pred, const Tensor& gt, const Tensor& psi,
                    const loss::WssL1Config& cfg) {
  Tensor out({1});
  out[0] = loss::wss_l1(pred->value, gt, psi, cfg);
  return t.make(std::move(out), {pred}, [pred, gt, psi, cfg](Node& self) {
    if (!pred->requires_grad) return;
    ensure_grad(pred);
    const Tensor g = loss::wss_l1_grad(pred->value, gt, psi, cfg);
    const double seed = self.grad[0];
    for (int64_t i = 0; i < g.size(); ++i) pred->grad[i] += seed * g[i];
  });
}

}  // namespace vfi360::ad
