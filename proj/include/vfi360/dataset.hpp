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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vfi360/flow.hpp"
#include "vfi360/tensor.hpp"

namespace vfi360::dataset {

enum class DropPolicy { kNone, kDropLastOne, kDropFirstAndLast };
DropPolicy drop_policy_from_string(const std::string& s);

enum class Setting { kEasy, kMiddle, kHard, kExtreme };
const char* setting_name(Setting s);
Setting setting_from_string(const std::string& s);

struct Triplet {
  std::string sample_id;
  std::string clip;
  std::string i1, ig, i2;  // frame paths
  double motion_extent = -1.0;
  std::optional<Setting> setting;
};

struct TripletManifest {
  std::vector<Triplet> entries;
  std::string split;       // "train" or "test"
  std::string source_tag;
  std::string extent_stat = "mean_abs_vertical_flow";
  std::string provider;
};

// Consecutive non-overlapping windows of 3 after applying the drop policy.
// Fewer than 3 kept frames yields an empty list (the caller logs a warning).
std::vector<Triplet> build_triplets(const std::vector<std::string>& frames, DropPolicy policy,
                                    const std::string& clip_id = "");

// Mean over pixels of |vertical flow component| between the two input frames.
double motion_extent(const Tensor& i1, const Tensor& i2, flow::FlowProvider& fp);

// Half-open buckets [0,2), [2,3), [3,4), [4,inf); boundary values promote up.
Setting bucket_for(double extent);

// Assigns settings in place; returns counts in Easy..Extreme order.
std::array<int, 4> stratify(std::vector<Triplet>& triplets);

struct IngestOptions {
  std::string root;
  DropPolicy policy = DropPolicy::kDropLastOne;
  std::string provider_spec = "bm";
  uint64_t split_seed = 0;
  double train_fraction = 0.8;
  std::string source_tag;
};

struct ClipError {
  std::string clip;
  std::string message;
};

struct IngestResult {
  TripletManifest train;
  TripletManifest test;
  std::array<int, 4> bucket_counts{};  // over train+test
  std::vector<ClipError> errors;
};

// Walks <root>/<clip_id>/<frame>.png (lexicographic frame order), builds and
// stratifies triplets, and splits train/test at the clip level. Faulty clips
// are recorded and skipped; the pipeline continues.
IngestResult ingest(const IngestOptions& opts);

void save_manifest(const TripletManifest& m, const std::string& path);
TripletManifest load_manifest(const std::string& path, bool check_files_exist = true);
// Vimeo-style "clip/triplet_index" list.
void save_triplet_list(const TripletManifest& m, const std::string& path);

}  // namespace vfi360::dataset
