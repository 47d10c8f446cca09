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

#include "vfi360/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "json.hpp"
#include "vfi360/image_io.hpp"

namespace vfi360::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

DropPolicy drop_policy_from_string(const std::string& s) {
  if (s == "none") return DropPolicy::kNone;
  if (s == "drop_last_one") return DropPolicy::kDropLastOne;
  if (s == "drop_first_and_last") return DropPolicy::kDropFirstAndLast;
  throw std::invalid_argument("unknown drop policy '" + s + "'");
}

const char* setting_name(Setting s) {
  switch (s) {
    case Setting::kEasy: return "Easy";
    case Setting::kMiddle: return "Middle";
    case Setting::kHard: return "Hard";
    case Setting::kExtreme: return "Extreme";
  }
  throw std::logic_error("bad setting");
}

Setting setting_from_string(const std::string& s) {
  for (Setting v : {Setting::kEasy, Setting::kMiddle, Setting::kHard, Setting::kExtreme}) {
    if (s == setting_name(v)) return v;
  }
  throw std::invalid_argument("unknown setting '" + s + "'");
}

std::vector<Triplet> build_triplets(const std::vector<std::string>& frames, DropPolicy policy,
                                    const std::string& clip_id) {
  std::vector<std::string> kept = frames;
  switch (policy) {
    case DropPolicy::kNone:
      break;
    case DropPolicy::kDropLastOne:
      if (!kept.empty()) kept.pop_back();
      break;
    case DropPolicy::kDropFirstAndLast:
      if (kept.size() >= 2) {
        kept.erase(kept.begin());
        kept.pop_back();
      } else {
        kept.clear();
      }
      break;
  }
  std::vector<Triplet> out;
  const size_t n = kept.size() / 3;
  for (size_t i = 0; i < n; ++i) {
    Triplet t;
    t.clip = clip_id;
    t.sample_id = clip_id.empty() ? std::to_string(i) : clip_id + "/" + std::to_string(i);
    t.i1 = kept[3 * i];
    t.ig = kept[3 * i + 1];
    t.i2 = kept[3 * i + 2];
    out.push_back(std::move(t));
  }
  return out;
}

double motion_extent(const Tensor& i1, const Tensor& i2, flow::FlowProvider& fp) {
  check_same_shape(i1, i2, "motion_extent");
  const Tensor f = fp.estimate(i1, i2);
  const int64_t plane = static_cast<int64_t>(f.dim(1)) * f.dim(2);
  double acc = 0.0;
  for (int64_t i = 0; i < plane; ++i) acc += std::fabs(f[plane + i]);  // vertical channel
  return acc / static_cast<double>(plane);
}

Setting bucket_for(double extent) {
  if (extent < 0.0 || !std::isfinite(extent)) {
    throw std::invalid_argument("bucket_for: negative or non-finite motion extent");
  }
  if (extent < 2.0) return Setting::kEasy;
  if (extent < 3.0) return Setting::kMiddle;
  if (extent < 4.0) return Setting::kHard;
  return Setting::kExtreme;
}

std::array<int, 4> stratify(std::vector<Triplet>& triplets) {
  std::array<int, 4> counts{};
  for (Triplet& t : triplets) {
    if (t.motion_extent < 0.0) throw std::invalid_argument("stratify: motion_extent not populated");
    t.setting = bucket_for(t.motion_extent);
    counts[static_cast<size_t>(*t.setting)]++;
  }
  return counts;
}

IngestResult ingest(const IngestOptions& opts) {
  IngestResult res;
  res.train.split = "train";
  res.test.split = "test";
  res.train.source_tag = res.test.source_tag = opts.source_tag;

  auto provider = flow::make_provider(opts.provider_spec);
  res.train.provider = res.test.provider = provider->name();

  std::vector<std::string> clips;
  for (const auto& e : fs::directory_iterator(opts.root)) {
    if (e.is_directory()) clips.push_back(e.path().filename().string());
  }
  std::sort(clips.begin(), clips.end());

  std::vector<Triplet> all;
  std::vector<std::string> ok_clips;
  for (const std::string& clip : clips) {
    std::vector<std::string> frames;
    for (const auto& e : fs::directory_iterator(fs::path(opts.root) / clip)) {
      if (e.is_regular_file() && e.path().extension() == ".png") frames.push_back(e.path().string());
    }
    std::sort(frames.begin(), frames.end());
    std::vector<Triplet> triplets = build_triplets(frames, opts.policy, clip);
    if (triplets.empty()) {
      res.errors.push_back({clip, "fewer than 3 frames after drop policy"});
      continue;
    }
    try {
      std::optional<std::vector<int>> dims;
      for (Triplet& t : triplets) {
        const Tensor a = io::read_frame(t.i1);
        const Tensor b = io::read_frame(t.i2);
        if (!dims) dims = a.shape();
        if (a.shape() != *dims || b.shape() != *dims) {
          throw std::runtime_error("inconsistent frame dimensions within clip");
        }
        t.motion_extent = motion_extent(a, b, *provider);
      }
    } catch (const std::exception& ex) {
      res.errors.push_back({clip, ex.what()});
      continue;
    }
    ok_clips.push_back(clip);
    all.insert(all.end(), triplets.begin(), triplets.end());
  }

  res.bucket_counts = stratify(all);

  // clip-level split so near-duplicate frames never cross the boundary
  std::vector<std::string> shuffled = ok_clips;
  std::mt19937_64 rng(opts.split_seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const size_t n_train =
      std::min(shuffled.size(), static_cast<size_t>(std::llround(opts.train_fraction *
                                                                 static_cast<double>(shuffled.size()))));
  std::vector<std::string> train_clips(shuffled.begin(), shuffled.begin() + static_cast<long>(n_train));
  std::sort(train_clips.begin(), train_clips.end());
  auto is_train = [&](const std::string& c) {
    return std::binary_search(train_clips.begin(), train_clips.end(), c);
  };
  for (Triplet& t : all) {
    (is_train(t.clip) ? res.train : res.test).entries.push_back(t);
  }
  return res;
}

namespace {

json triplet_to_json(const Triplet& t) {
  json j{{"sample_id", t.sample_id}, {"clip", t.clip},          {"i1", t.i1},
         {"ig", t.ig},               {"i2", t.i2},              {"motion_extent", t.motion_extent}};
  if (t.setting) j["setting"] = setting_name(*t.setting);
  return j;
}

}  // namespace

void save_manifest(const TripletManifest& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_manifest: cannot open " + path);
  json meta{{"_meta", json{{"split", m.split},
                           {"source_tag", m.source_tag},
                           {"extent_stat", m.extent_stat},
                           {"provider", m.provider}}}};
  f << meta.dump() << "\n";
  for (const Triplet& t : m.entries) f << triplet_to_json(t).dump() << "\n";
}

TripletManifest load_manifest(const std::string& path, bool check_files_exist) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_manifest: cannot open " + path);
  TripletManifest m;
  std::string line;
  std::vector<std::string> seen_ids;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.contains("_meta")) {
      const json& meta = j.at("_meta");
      m.split = meta.value("split", "");
      m.source_tag = meta.value("source_tag", "");
      m.extent_stat = meta.value("extent_stat", m.extent_stat);
      m.provider = meta.value("provider", "");
      continue;
    }
    Triplet t;
    t.sample_id = j.at("sample_id").get<std::string>();
    t.clip = j.at("clip").get<std::string>();
    t.i1 = j.at("i1").get<std::string>();
    t.ig = j.at("ig").get<std::string>();
    t.i2 = j.at("i2").get<std::string>();
    t.motion_extent = j.at("motion_extent").get<double>();
    if (j.contains("setting")) t.setting = setting_from_string(j.at("setting").get<std::string>());
    seen_ids.push_back(t.sample_id);
    m.entries.push_back(std::move(t));
  }
  std::sort(seen_ids.begin(), seen_ids.end());
  if (std::adjacent_find(seen_ids.begin(), seen_ids.end()) != seen_ids.end()) {
    throw std::runtime_error("load_manifest: duplicate sample ids in " + path);
  }
  if (check_files_exist) {
    for (const Triplet& t : m.entries) {
      for (const std::string* p : {&t.i1, &t.ig, &t.i2}) {
        if (!fs::exists(*p)) throw std::runtime_error("load_manifest: missing frame file " + *p);
      }
    }
  }
  return m;
}

void save_triplet_list(const TripletManifest& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_triplet_list: cannot open " + path);
  for (const Triplet& t : m.entries) f << t.sample_id << "\n";
}

}  // namespace vfi360::dataset
