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

#include "vfi360/tensor.hpp"

#include <cmath>
#include <sstream>

namespace vfi360 {

Tensor::Tensor(std::vector<int> shape, double fill) : shape_(std::move(shape)) {
  size_ = 1;
  for (int d : shape_) {
    if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
    size_ *= d;
  }
  data_ = std::make_shared<std::vector<double>>(static_cast<size_t>(size_), fill);
}

Tensor Tensor::clone() const {
  Tensor out;
  out.shape_ = shape_;
  out.size_ = size_;
  out.data_ = data_ ? std::make_shared<std::vector<double>>(*data_)
                    : std::make_shared<std::vector<double>>();
  return out;
}

void Tensor::fill(double v) {
  if (data_) std::fill(data_->begin(), data_->end(), v);
}

bool Tensor::all_finite() const {
  if (!data_) return true;
  for (double v : *data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
  os << ")";
  return os.str();
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
  }
}

}  // namespace vfi360
