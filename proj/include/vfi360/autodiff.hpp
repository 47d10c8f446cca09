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

#include <functional>
#include <memory>
#include <vector>

#include "vfi360/loss.hpp"
#include "vfi360/tensor.hpp"

namespace vfi360::ad {

// Minimal reverse-mode tape. Nodes are created through a Tape; backward()
// walks the recorded order in reverse. Single-threaded by construction.
struct Node {
  Tensor value;
  Tensor grad;  // allocated lazily during backward
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;  // scatters node.grad into parent grads
  size_t order = 0;
};

using NodePtr = std::shared_ptr<Node>;

class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const { return grad_enabled_; }

  NodePtr leaf(Tensor value, bool requires_grad = false);
  NodePtr make(Tensor value, std::vector<NodePtr> parents, std::function<void(Node&)> backprop);

  // Seeds d(root)/d(root) = 1 (root must be scalar) and accumulates grads.
  void backward(const NodePtr& root);

  size_t node_count() const { return nodes_.size(); }

 private:
  std::vector<NodePtr> nodes_;
  bool grad_enabled_;
};

void ensure_grad(const NodePtr& n);

// Elementwise.
NodePtr add(Tape& t, const NodePtr& a, const NodePtr& b);
NodePtr sub(Tape& t, const NodePtr& a, const NodePtr& b);
NodePtr mul(Tape& t, const NodePtr& a, const NodePtr& b);
NodePtr scale(Tape& t, const NodePtr& a, double s);
NodePtr leaky_relu(Tape& t, const NodePtr& a, double slope = 0.1);
NodePtr sigmoid(Tape& t, const NodePtr& a);
NodePtr clamp01(Tape& t, const NodePtr& a);

// Channel-dim ops for {C,H,W}.
NodePtr concat_channels(Tape& t, const std::vector<NodePtr>& parts);
NodePtr slice_channels(Tape& t, const NodePtr& a, int from, int count);

// conv2d: x {Cin,H,W}, w {Cout,Cin,kh,kw}, b {Cout}; zero padding.
NodePtr conv2d(Tape& t, const NodePtr& x, const NodePtr& w, const NodePtr& b, int stride,
               int pad);

// Deformable 3x3 convolution, stride 1, zero-pad semantics: each kernel tap
// samples x bilinearly at (grid + tap + offset), out-of-bounds reads zero.
// offsets {2*9,H,W} with channels (2k, 2k+1) = (dy, dx) of tap k.
NodePtr deform_conv2d(Tape& t, const NodePtr& x, const NodePtr& offsets, const NodePtr& w,
                      const NodePtr& b);

// Backward bilinear warp: out(c,y,x) = src(c, y + flow[1], x + flow[0]),
// horizontally wrapped, vertically clamped. flow {2,H,W}.
NodePtr warp_bilinear(Tape& t, const NodePtr& src, const NodePtr& flow);

// Bilinear x2 upsampling with half-pixel centers, border-clamped.
NodePtr upsample2x(Tape& t, const NodePtr& a);

// Scalar WSS-L1 loss node; gt and psi are constants.
NodePtr wss_l1_loss(Tape& t, const NodePtr& pred, const Tensor& gt, const Tensor& psi,
                    const loss::WssL1Config& cfg);

}  // namespace vfi360::ad
