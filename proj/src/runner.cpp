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

#include "vfi360/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>

#include "json.hpp"
#include "vfi360/checkpoint.hpp"
#include "vfi360/erp_geometry.hpp"
#include "vfi360/image_io.hpp"

namespace vfi360::runner {

namespace fs = std::filesystem;
using nlohmann::json;

TrainConfig train_config_from_kv(const config::KeyValues& kv) {
  TrainConfig c;
  c.epochs = static_cast<int>(kv.get_int("train.epochs", c.epochs));
  c.batch_size = static_cast<int>(kv.get_int("train.batch_size", c.batch_size));
  c.lr_init = kv.get_double("train.lr_init", c.lr_init);
  c.lr_final = kv.get_double("train.lr_final", c.lr_final);
  c.schedule = kv.get_string("train.schedule", c.schedule);
  c.seed = static_cast<uint64_t>(kv.get_int("train.seed", static_cast<int64_t>(c.seed)));
  c.iterations = kv.get_int("train.iterations", c.iterations);
  c.checkpoint_every = kv.get_int("train.checkpoint_every", c.checkpoint_every);
  c.val_every = static_cast<int>(kv.get_int("train.val_every", c.val_every));
  c.guard = kv.get_bool("ablation.guard", c.guard);
  c.ftb = kv.get_bool("ablation.ftb", c.ftb);
  c.loss_cfg.huber_delta = kv.get_double("loss.huber_delta", c.loss_cfg.huber_delta);
  const std::string red = kv.get_string("loss.reduction", "mean");
  if (red == "mean") {
    c.loss_cfg.reduction = loss::Reduction::kMean;
  } else if (red == "sum") {
    c.loss_cfg.reduction = loss::Reduction::kSum;
  } else {
    throw std::runtime_error("config: loss.reduction must be mean or sum");
  }
  if (c.epochs < 1) throw std::runtime_error("config: train.epochs must be >= 1");
  if (c.lr_final > c.lr_init) throw std::runtime_error("config: lr_final must be <= lr_init");
  if (c.schedule != "cosine") throw std::runtime_error("config: only the cosine schedule exists");
  return c;
}

config::KeyValues train_config_to_kv(const TrainConfig& c) {
  config::KeyValues kv;
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  kv.set("train.epochs", std::to_string(c.epochs));
  kv.set("train.batch_size", std::to_string(c.batch_size));
  kv.set("train.lr_init", num(c.lr_init));
  kv.set("train.lr_final", num(c.lr_final));
  kv.set("train.schedule", c.schedule);
  kv.set("train.seed", std::to_string(c.seed));
  kv.set("train.iterations", std::to_string(c.iterations));
  kv.set("train.checkpoint_every", std::to_string(c.checkpoint_every));
  kv.set("train.val_every", std::to_string(c.val_every));
  kv.set("ablation.guard", c.guard ? "true" : "false");
  kv.set("ablation.ftb", c.ftb ? "true" : "false");
  kv.set("loss.huber_delta", num(c.loss_cfg.huber_delta));
  kv.set("loss.reduction", c.loss_cfg.reduction == loss::Reduction::kMean ? "mean" : "sum");
  return kv;
}

std::string config_fingerprint(const TrainConfig& cfg) {
  return config::fingerprint(train_config_to_kv(cfg).canonical());
}

TrainConfig toy_preset(TrainConfig base) {
  base.iterations = 200;
  base.batch_size = 1;
  base.lr_init = 1e-3;
  base.lr_final = 1e-4;
  base.checkpoint_every = 200;
  return base;
}

double lr_at(int64_t step, int64_t total_steps, const TrainConfig& cfg) {
  if (step < 0 || step > total_steps || total_steps < 1) {
    throw std::invalid_argument("lr_at: step outside [0, total_steps]");
  }
  const double t = static_cast<double>(step) / static_cast<double>(total_steps);
  return cfg.lr_final + 0.5 * (cfg.lr_init - cfg.lr_final) * (1.0 + std::cos(std::numbers::pi * t));
}

namespace {

struct Sample {
  std::string id;
  Tensor i1, ig, i2;
};

std::vector<Sample> load_samples(const dataset::TripletManifest& m) {
  std::vector<Sample> out;
  out.reserve(m.entries.size());
  for (const dataset::Triplet& t : m.entries) {
    out.push_back({t.sample_id, io::read_frame(t.i1), io::read_frame(t.ig), io::read_frame(t.i2)});
  }
  return out;
}

std::vector<size_t> epoch_order(size_t n, uint64_t seed, int64_t epoch) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * static_cast<uint64_t>(epoch + 1)));
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace

TrainResult train(const dataset::TripletManifest& manifest, const TrainConfig& cfg,
                  const std::string& out_dir, const std::string& resume_ckpt,
                  const dataset::TripletManifest* val_manifest) {
  if (manifest.entries.empty()) throw std::invalid_argument("train: empty manifest");
  fs::create_directories(out_dir);
  const std::string fp = config_fingerprint(cfg);

  std::vector<Sample> samples = load_samples(manifest);
  // drop shape-inconsistent samples up front
  {
    const std::vector<int> ref = samples.front().i1.shape();
    std::vector<Sample> kept;
    for (Sample& s : samples) {
      if (s.i1.shape() == ref && s.ig.shape() == ref && s.i2.shape() == ref) {
        kept.push_back(std::move(s));
      } else {
        std::cerr << "train: skipping shape-inconsistent sample " << s.id << "\n";
      }
    }
    samples = std::move(kept);
  }
  const size_t n = samples.size();
  if (n == 0) throw std::invalid_argument("train: no usable samples");
  const int H = samples.front().i1.dim(1), W = samples.front().i1.dim(2);
  const Tensor psi = erp::weight_map(H, W);

  model::ModelConfig mc;
  mc.guard = cfg.guard;
  mc.ftb = cfg.ftb;
  model::Vfi360Net net(mc, cfg.seed);
  nn::AdamW adam;

  const int64_t steps_per_epoch =
      static_cast<int64_t>((n + static_cast<size_t>(cfg.batch_size) - 1) / static_cast<size_t>(cfg.batch_size));
  const int64_t total_steps =
      cfg.iterations > 0 ? cfg.iterations : steps_per_epoch * cfg.epochs;

  int64_t start_step = 0;
  if (!resume_ckpt.empty()) {
    checkpoint::Loaded loaded = checkpoint::load(resume_ckpt, &net, mc);
    start_step = loaded.meta.iteration;
    adam.set_steps_taken(loaded.meta.adam_steps);
  }

  TrainResult result;
  auto save_ckpt = [&](const std::string& name, int64_t iteration) {
    checkpoint::Meta meta;
    meta.iteration = iteration;
    meta.adam_steps = adam.steps_taken();
    meta.config_fingerprint = fp;
    const std::string path = (fs::path(out_dir) / name).string();
    checkpoint::save(net, meta, path, /*include_optimizer_state=*/true);
    return path;
  };

  double best_ws_psnr = -1.0;
  for (int64_t step = start_step; step < total_steps; ++step) {
    const int64_t epoch = step / steps_per_epoch;
    const int64_t batch_idx = step % steps_per_epoch;
    const std::vector<size_t> order = epoch_order(n, cfg.seed, epoch);
    const size_t begin = static_cast<size_t>(batch_idx) * static_cast<size_t>(cfg.batch_size);
    const size_t end = std::min(n, begin + static_cast<size_t>(cfg.batch_size));

    net.params().zero_grad();
    double batch_loss = 0.0;
    const double inv = 1.0 / static_cast<double>(end - begin);
    for (size_t bi = begin; bi < end; ++bi) {
      const Sample& s = samples[order[bi]];
      ad::Tape tape;
      ad::NodePtr a = tape.leaf(s.i1);
      ad::NodePtr b = tape.leaf(s.i2);
      model::ForwardResult fr = net.forward(tape, a, b);
      ad::NodePtr l = ad::wss_l1_loss(tape, fr.pred, s.ig, psi, cfg.loss_cfg);
      batch_loss += l->value[0] * inv;
      tape.backward(ad::scale(tape, l, inv));
      net.params().harvest();
    }
    if (!std::isfinite(batch_loss)) {
      const std::string diag = save_ckpt("diag_nan_step" + std::to_string(step) + ".ckpt", step);
      throw std::runtime_error("train: non-finite loss at step " + std::to_string(step) +
                               "; diagnostic snapshot written to " + diag);
    }
    result.loss_trajectory.push_back(batch_loss);
    adam.step(net.params(), lr_at(step, total_steps, cfg));

    const int64_t done = step + 1;
    if (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 && done < total_steps) {
      save_ckpt("ckpt_latest.ckpt", done);
    }
    if (val_manifest && cfg.val_every > 0 && done % (steps_per_epoch * cfg.val_every) == 0) {
      BenchmarkReport rep = evaluate_with_net(*val_manifest, net, fp);
      double ws = 0.0;
      int cnt = 0;
      for (const SettingMean& sm : rep.means) {
        ws += sm.mean.ws_psnr * sm.count;
        cnt += sm.count;
      }
      if (cnt > 0) ws /= cnt;
      if (ws > best_ws_psnr) {
        best_ws_psnr = ws;
        result.best_checkpoint = save_ckpt("ckpt_best.ckpt", done);
      }
    }
  }
  result.final_checkpoint = save_ckpt("ckpt_final.ckpt", total_steps);
  result.iterations_run = total_steps - start_step;
  return result;
}

namespace {

const char* kSettingOrder[4] = {"Easy", "Middle", "Hard", "Extreme"};

void finalize_means(BenchmarkReport& rep) {
  for (const char* name : kSettingOrder) {
    SettingMean sm;
    sm.setting = name;
    for (const SampleRow& r : rep.rows) {
      if (r.setting != name) continue;
      sm.count++;
      sm.mean.psnr += r.m.psnr;
      sm.mean.ssim += r.m.ssim;
      sm.mean.ws_psnr += r.m.ws_psnr;
      sm.mean.ws_ssim += r.m.ws_ssim;
    }
    if (sm.count == 0) continue;
    sm.mean.psnr /= sm.count;
    sm.mean.ssim /= sm.count;
    sm.mean.ws_psnr /= sm.count;
    sm.mean.ws_ssim /= sm.count;
    rep.means.push_back(sm);
  }
}

}  // namespace

BenchmarkReport evaluate_with_net(const dataset::TripletManifest& manifest,
                                  model::Vfi360Net& net, const std::string& fingerprint) {
  const auto t0 = std::chrono::steady_clock::now();
  BenchmarkReport rep;
  rep.fingerprint = fingerprint;
  for (const dataset::Triplet& t : manifest.entries) {
    if (!t.setting) throw std::invalid_argument("evaluate: manifest not stratified");
    const Tensor gt = io::read_frame(t.ig);
    const Tensor pred = net.interpolate(io::read_frame(t.i1), io::read_frame(t.i2));
    rep.rows.push_back({dataset::setting_name(*t.setting), t.sample_id,
                        metrics::evaluate_pair(pred, gt)});
  }
  finalize_means(rep);
  rep.wall_clock_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

BenchmarkReport evaluate(const dataset::TripletManifest& manifest, const EvalSource& src,
                         const std::string& fingerprint) {
  const auto t0 = std::chrono::steady_clock::now();
  BenchmarkReport rep;
  rep.fingerprint = fingerprint;

  std::optional<model::Vfi360Net> net;
  if (!src.checkpoint.empty()) {
    net.emplace(checkpoint::peek_config(src.checkpoint));
    checkpoint::load(src.checkpoint, &*net);
  } else if (src.predictions_dir.empty()) {
    throw std::invalid_argument("evaluate: need a checkpoint or a predictions directory");
  }

  for (const dataset::Triplet& t : manifest.entries) {
    if (!t.setting) throw std::invalid_argument("evaluate: manifest not stratified");
    const Tensor gt = io::read_frame(t.ig);
    Tensor pred;
    if (net) {
      pred = net->interpolate(io::read_frame(t.i1), io::read_frame(t.i2));
    } else {
      const fs::path p = fs::path(src.predictions_dir) / (t.sample_id + ".png");
      if (!fs::exists(p)) {
        rep.missing_predictions.push_back(t.sample_id);
        continue;
      }
      pred = io::read_frame(p.string());
    }
    rep.rows.push_back({dataset::setting_name(*t.setting), t.sample_id,
                        metrics::evaluate_pair(pred, gt)});
  }
  finalize_means(rep);
  rep.wall_clock_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

void write_report_csv(const BenchmarkReport& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_report_csv: cannot open " + path);
  f.precision(10);
  f << "setting,sample_id,psnr,ssim,ws_psnr,ws_ssim\n";
  for (const SampleRow& row : r.rows) {
    f << row.setting << "," << row.sample_id << "," << row.m.psnr << "," << row.m.ssim << ","
      << row.m.ws_psnr << "," << row.m.ws_ssim << "\n";
  }
}

void write_report_json(const BenchmarkReport& r, const std::string& path) {
  json j;
  j["fingerprint"] = r.fingerprint;
  j["wall_clock_sec"] = r.wall_clock_sec;
  j["missing_predictions"] = r.missing_predictions;
  json rows = json::array();
  for (const SampleRow& row : r.rows) {
    rows.push_back(json{{"setting", row.setting},
                        {"sample_id", row.sample_id},
                        {"psnr", row.m.psnr},
                        {"ssim", row.m.ssim},
                        {"ws_psnr", row.m.ws_psnr},
                        {"ws_ssim", row.m.ws_ssim}});
  }
  j["rows"] = rows;
  json means = json::array();
  for (const SettingMean& sm : r.means) {
    means.push_back(json{{"setting", sm.setting},
                         {"count", sm.count},
                         {"psnr", sm.mean.psnr},
                         {"ssim", sm.mean.ssim},
                         {"ws_psnr", sm.mean.ws_psnr},
                         {"ws_ssim", sm.mean.ws_ssim}});
  }
  j["means"] = means;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_report_json: cannot open " + path);
  f << j.dump(2) << "\n";
}

bool AblateResult::all_ok() const {
  for (const AblateVariant& v : variants) {
    if (!v.ok) return false;
  }
  return true;
}

AblateResult ablate(const dataset::TripletManifest& train_manifest,
                    const dataset::TripletManifest& test_manifest, const TrainConfig& base,
                    const std::string& out_dir) {
  // Row order follows the ablation table: neither, guard only, ftb only, both.
  const std::pair<bool, bool> flags[4] = {{false, false}, {true, false}, {false, true}, {true, true}};
  AblateResult res;
  for (const auto& [guard, ftb] : flags) {
    AblateVariant v;
    v.guard = guard;
    v.ftb = ftb;
    TrainConfig cfg = base;
    cfg.guard = guard;
    cfg.ftb = ftb;
    const std::string dir = (fs::path(out_dir) / (std::string("variant_") + (guard ? "g" : "x") +
                                                  (ftb ? "f" : "x"))).string();
    try {
      TrainResult tr = train(train_manifest, cfg, dir);
      v.checkpoint = tr.final_checkpoint;
      EvalSource src;
      src.checkpoint = v.checkpoint;
      v.report = evaluate(test_manifest, src, config_fingerprint(cfg));
      v.ok = true;
    } catch (const std::exception& ex) {
      v.error = ex.what();
    }
    res.variants.push_back(std::move(v));
  }
  return res;
}

}  // namespace vfi360::runner
