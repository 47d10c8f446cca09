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

#include <string>

#include "vfi360/tensor.hpp"

namespace vfi360::io {

// PNG <-> {3,H,W} RGB frame in [0,1]. 8-bit inputs are normalized by 255.
Tensor read_frame(const std::string& path);
void write_frame(const Tensor& frame, const std::string& path);

}  // namespace vfi360::io
