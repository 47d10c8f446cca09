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
#include <vector>

#include "vfi360/config.hpp"
#include "vfi360/dataset.hpp"
#include "vfi360/loss.hpp"
#include "vfi360/metrics.hpp"
#include "vfi360/model.hpp"

namespace vfi360::runner {

struct TrainConfig {
  int epochs = 300;
  int batch_size = 8;
  double lr_init = 1e-4;
  double lr_final = 1e-5;
  std::string schedule = "cosine";
  uint64_t seed = 0;
  bool guard = true;
  bool ftb = true;
  loss::WssL1Config loss_cfg;
  int64_t iterations = 0;  // > 0 overrides epochs * steps_per_epoch
  int64_t checkpoint_every = 500;
  int val_every = 0;  // epochs between validation passes; 0 disables
};

TrainConfig train_config_from_kv(const config::KeyValues& kv);
config::KeyValues train_config_to_kv(const TrainConfig& cfg);
std::string config_fingerprint(const TrainConfig& cfg);
// Desk-scale profile: 200 iterations, batch 1, boosted learning rate.
TrainConfig toy_preset(TrainConfig base = {});

// Cosine attenuation from lr_init to lr_final over total_steps.
double lr_at(int64_t step, int64_t total_steps, const TrainConfig& cfg);

struct TrainResult {
  std::vector<double> loss_trajectory;  // per optimizer step, batch mean
  std::string final_checkpoint;
  std::string best_checkpoint;  // set when validation ran
  int64_t iterations_run = 0;
};

// Optimizes the network with WSS-L1, no geometric augmentation, periodic
// checkpoints with optimizer state; resumable and bit-reproducible under a
// fixed seed (everything here is single-threaded).
TrainResult train(const dataset::TripletManifest& manifest, const TrainConfig& cfg,
                  const std::string& out_dir, const std::string& resume_ckpt = "",
                  const dataset::TripletManifest* val_manifest = nullptr);

struct SampleRow {
  std::string setting;
  std::string sample_id;
  metrics::MetricReport m;
};

struct SettingMean {
  std::string setting;
  int count = 0;
  metrics::MetricReport mean;
};

struct BenchmarkReport {
  std::vector<SampleRow> rows;
  std::vector<SettingMean> means;  // Easy..Extreme order, present settings only
  std::vector<std::string> missing_predictions;
  std::string fingerprint;
  double wall_clock_sec = 0.0;
};

struct EvalSource {
  std::string checkpoint;       // run the network, or
  std::string predictions_dir;  // externally produced <sample_id>.png frames
};

BenchmarkReport evaluate(const dataset::TripletManifest& manifest, const EvalSource& src,
                         const std::string& fingerprint = "");
BenchmarkReport evaluate_with_net(const dataset::TripletManifest& manifest,
                                  model::Vfi360Net& net, const std::string& fingerprint = "");

void write_report_csv(const BenchmarkReport& r, const std::string& path);
void write_report_json(const BenchmarkReport& r, const std::string& path);

struct AblateVariant {
  bool guard = false;
  bool ftb = false;
  bool ok = false;
  std::string error;
  std::string checkpoint;
  BenchmarkReport report;
};

struct AblateResult {
  std::vector<AblateVariant> variants;  // (x,x), (v,x), (x,v), (v,v)
  bool all_ok() const;
};

AblateResult ablate(const dataset::TripletManifest& train_manifest,
                    const dataset::TripletManifest& test_manifest, const TrainConfig& base,
                    const std::string& out_dir);

}  // namespace vfi360::runner
