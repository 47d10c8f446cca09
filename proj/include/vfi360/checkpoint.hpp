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

#include <optional>
#include <string>

#include "vfi360/model.hpp"

namespace vfi360::checkpoint {

struct Meta {
  int64_t iteration = 0;
  int64_t adam_steps = 0;
  std::string config_fingerprint;
  bool has_optimizer_state = false;
};

// Versioned container: magic + JSON header (model config, flags, tensor
// directory) followed by raw little-endian float64 tensor data.
void save(const model::Vfi360Net& net, const Meta& meta, const std::string& path,
          bool include_optimizer_state);

struct Loaded {
  model::ModelConfig config;
  Meta meta;
};

// Loads into `net` if provided (must match the stored config exactly;
// refuses on ablation-flag mismatch). With expect set, the stored flags are
// checked against it before any weight is touched.
Loaded load(const std::string& path, model::Vfi360Net* net,
            const std::optional<model::ModelConfig>& expect = std::nullopt);

// Reads just the stored config so a caller can construct a matching net.
model::ModelConfig peek_config(const std::string& path);

}  // namespace vfi360::checkpoint
