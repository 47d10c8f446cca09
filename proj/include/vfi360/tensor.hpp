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

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace vfi360 {

// Dense row-major tensor of doubles. Copies share storage; use clone() for a
// deep copy. Image frames are stored CHW, flow fields as {2,H,W} with
// channel 0 = horizontal displacement and channel 1 = vertical displacement.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0);

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_); }

  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  int64_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  double* data() { return data_->data(); }
  const double* data() const { return data_->data(); }

  double& operator[](int64_t i) { return (*data_)[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return (*data_)[static_cast<size_t>(i)]; }

  // 3-d accessors for {C,H,W} tensors.
  double& at(int c, int y, int x) {
    return (*data_)[static_cast<size_t>((static_cast<int64_t>(c) * shape_[1] + y) * shape_[2] + x)];
  }
  double at(int c, int y, int x) const {
    return (*data_)[static_cast<size_t>((static_cast<int64_t>(c) * shape_[1] + y) * shape_[2] + x)];
  }
  // 2-d accessors for {H,W} tensors.
  double& at(int y, int x) { return (*data_)[static_cast<size_t>(static_cast<int64_t>(y) * shape_[1] + x)]; }
  double at(int y, int x) const { return (*data_)[static_cast<size_t>(static_cast<int64_t>(y) * shape_[1] + x)]; }

  Tensor clone() const;
  void fill(double v);
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;

  std::string shape_str() const;

 private:
  std::vector<int> shape_;
  std::shared_ptr<std::vector<double>> data_;
  int64_t size_ = 0;
};

void check_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace vfi360
