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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "vfi360/checkpoint.hpp"
#include "vfi360/image_io.hpp"
#include "vfi360/metrics.hpp"
#include "vfi360/runner.hpp"

using namespace vfi360;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("vfi360_runner_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Tensor pattern_frame(int H, int W, int shift, uint64_t seed) {
  Tensor t({3, H, W});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  Tensor base({3, H, W});
  for (int64_t i = 0; i < base.size(); ++i) base[i] = u(rng);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) t.at(c, y, x) = base.at(c, y, (x + shift) % W);
  return t;
}

// Builds a stratified manifest of `n` triplets backed by real PNG fixtures.
dataset::TripletManifest make_manifest(const fs::path& dir, int n, int H = 32, int W = 64) {
  dataset::TripletManifest m;
  m.split = "train";
  m.provider = "oracle:1,0";
  for (int i = 0; i < n; ++i) {
    dataset::Triplet t;
    t.clip = "clip" + std::to_string(i);
    t.sample_id = t.clip + "/0";
    fs::create_directories(dir / t.clip);
    const uint64_t seed = 100 + static_cast<uint64_t>(i);
    t.i1 = (dir / t.clip / "0.png").string();
    t.ig = (dir / t.clip / "1.png").string();
    t.i2 = (dir / t.clip / "2.png").string();
    io::write_frame(pattern_frame(H, W, 0, seed), t.i1);
    io::write_frame(pattern_frame(H, W, 1, seed), t.ig);
    io::write_frame(pattern_frame(H, W, 2, seed), t.i2);
    t.motion_extent = 0.5;
    t.setting = dataset::Setting::kEasy;
    m.entries.push_back(std::move(t));
  }
  return m;
}

}  // namespace

TEST_CASE("cosine schedule hits the pinned values") {
  runner::TrainConfig cfg;  // lr 1e-4 -> 1e-5
  const int64_t total = 1000;
  CHECK(runner::lr_at(0, total, cfg) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(runner::lr_at(total, total, cfg) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(runner::lr_at(total / 2, total, cfg) == doctest::Approx(5.5e-5).epsilon(1e-12));

  // monotone non-increasing
  double prev = runner::lr_at(0, total, cfg);
  for (int64_t s = 1; s <= total; ++s) {
    const double lr = runner::lr_at(s, total, cfg);
    CHECK(lr <= prev + 1e-18);
    prev = lr;
  }
  CHECK_THROWS_AS(runner::lr_at(-1, total, cfg), std::invalid_argument);
  CHECK_THROWS_AS(runner::lr_at(total + 1, total, cfg), std::invalid_argument);
}

TEST_CASE("train config round-trips through key-value form") {
  runner::TrainConfig cfg;
  cfg.epochs = 17;
  cfg.batch_size = 3;
  cfg.lr_init = 2.5e-4;
  cfg.lr_final = 1.5e-5;
  cfg.seed = 99;
  cfg.guard = false;
  cfg.loss_cfg.huber_delta = 0.7;
  cfg.loss_cfg.reduction = loss::Reduction::kSum;
  const runner::TrainConfig back = runner::train_config_from_kv(runner::train_config_to_kv(cfg));
  CHECK(back.epochs == 17);
  CHECK(back.batch_size == 3);
  CHECK(back.lr_init == cfg.lr_init);
  CHECK(back.lr_final == cfg.lr_final);
  CHECK(back.seed == 99);
  CHECK_FALSE(back.guard);
  CHECK(back.ftb);
  CHECK(back.loss_cfg.huber_delta == 0.7);
  CHECK(back.loss_cfg.reduction == loss::Reduction::kSum);
}

TEST_CASE("config validation") {
  config::KeyValues kv;
  kv.set("train.epochs", "0");
  CHECK_THROWS(runner::train_config_from_kv(kv));
  kv.set("train.epochs", "1");
  kv.set("train.lr_init", "1e-5");
  kv.set("train.lr_final", "1e-4");
  CHECK_THROWS(runner::train_config_from_kv(kv));
  kv.set("train.lr_final", "1e-6");
  kv.set("train.schedule", "step");
  CHECK_THROWS(runner::train_config_from_kv(kv));
  kv.set("train.schedule", "cosine");
  kv.set("loss.reduction", "median");
  CHECK_THROWS(runner::train_config_from_kv(kv));
}

TEST_CASE("fingerprint reacts to every config field") {
  const runner::TrainConfig base;
  const std::string fp0 = runner::config_fingerprint(base);
  CHECK(fp0.size() == 64);  // SHA-256 hex

  auto differs = [&](runner::TrainConfig c) { return runner::config_fingerprint(c) != fp0; };
  runner::TrainConfig c = base;
  c.epochs = 301;
  CHECK(differs(c));
  c = base;
  c.batch_size = 7;
  CHECK(differs(c));
  c = base;
  c.lr_init = 2e-4;
  CHECK(differs(c));
  c = base;
  c.lr_final = 2e-5;
  CHECK(differs(c));
  c = base;
  c.seed = 1;
  CHECK(differs(c));
  c = base;
  c.guard = false;
  CHECK(differs(c));
  c = base;
  c.ftb = false;
  CHECK(differs(c));
  c = base;
  c.loss_cfg.huber_delta = 0.5;
  CHECK(differs(c));
  c = base;
  c.loss_cfg.reduction = loss::Reduction::kSum;
  CHECK(differs(c));
  // identical config, identical fingerprint
  CHECK(runner::config_fingerprint(base) == fp0);
}

TEST_CASE("toy preset pins the desk-scale profile") {
  const runner::TrainConfig toy = runner::toy_preset();
  CHECK(toy.iterations == 200);
  CHECK(toy.batch_size == 1);
  CHECK(toy.lr_init == 1e-3);
  CHECK(toy.lr_final == 1e-4);
}

TEST_CASE("evaluate against external predictions") {
  TempDir dir("eval");
  const dataset::TripletManifest m = make_manifest(dir.path / "data", 2);

  // predictions identical to ground truth
  const fs::path preds = dir.path / "preds";
  for (const dataset::Triplet& t : m.entries) {
    fs::create_directories((preds / t.sample_id).parent_path());
    fs::copy_file(t.ig, preds / (t.sample_id + ".png"));
  }
  runner::EvalSource src;
  src.predictions_dir = preds.string();
  const runner::BenchmarkReport rep = runner::evaluate(m, src);
  CHECK(rep.missing_predictions.empty());
  REQUIRE(rep.rows.size() == 2);
  REQUIRE(rep.means.size() == 1);  // single-setting manifest -> one block
  CHECK(rep.means[0].setting == "Easy");
  CHECK(rep.means[0].count == 2);
  CHECK(rep.means[0].mean.psnr == metrics::kPsnrCap);
  CHECK(rep.means[0].mean.ws_psnr == metrics::kPsnrCap);
  CHECK(rep.means[0].mean.ssim == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.means[0].mean.ws_ssim == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("missing predictions are flagged and excluded") {
    fs::remove(preds / (m.entries[1].sample_id + ".png"));
    const runner::BenchmarkReport r2 = runner::evaluate(m, src);
    REQUIRE(r2.missing_predictions.size() == 1);
    CHECK(r2.missing_predictions[0] == m.entries[1].sample_id);
    CHECK(r2.rows.size() == 1);
  }
  SUBCASE("evaluation is deterministic") {
    const runner::BenchmarkReport r2 = runner::evaluate(m, src);
    REQUIRE(r2.rows.size() == rep.rows.size());
    for (size_t i = 0; i < rep.rows.size(); ++i) {
      CHECK(r2.rows[i].m.psnr == rep.rows[i].m.psnr);
      CHECK(r2.rows[i].m.ws_ssim == rep.rows[i].m.ws_ssim);
    }
  }
  SUBCASE("reports serialize to CSV and JSON") {
    const std::string csv = (dir.path / "r.csv").string();
    const std::string js = (dir.path / "r.json").string();
    runner::write_report_csv(rep, csv);
    runner::write_report_json(rep, js);
    std::ifstream f(csv);
    std::string header;
    REQUIRE(std::getline(f, header));
    CHECK(header == "setting,sample_id,psnr,ssim,ws_psnr,ws_ssim");
    std::ifstream g(js);
    REQUIRE(g.good());
  }
  SUBCASE("unstratified manifests are rejected") {
    dataset::TripletManifest bare = m;
    bare.entries[0].setting.reset();
    CHECK_THROWS(runner::evaluate(bare, src));
  }
  SUBCASE("a source must be given") {
    CHECK_THROWS(runner::evaluate(m, runner::EvalSource{}));
  }
}

TEST_CASE("short training runs are reproducible and resumable") {
  TempDir dir("train");
  const dataset::TripletManifest m = make_manifest(dir.path / "data", 2);

  runner::TrainConfig cfg;
  cfg.iterations = 4;
  cfg.batch_size = 1;
  cfg.lr_init = 1e-3;
  cfg.lr_final = 1e-4;
  cfg.checkpoint_every = 2;
  cfg.seed = 11;

  const runner::TrainResult r1 = runner::train(m, cfg, (dir.path / "run1").string());
  REQUIRE(r1.loss_trajectory.size() == 4);
  CHECK(r1.iterations_run == 4);

  SUBCASE("bit-exact across two runs") {
    const runner::TrainResult r2 = runner::train(m, cfg, (dir.path / "run2").string());
    REQUIRE(r2.loss_trajectory.size() == 4);
    for (size_t i = 0; i < 4; ++i) CHECK(r1.loss_trajectory[i] == r2.loss_trajectory[i]);
  }
  SUBCASE("resume continues the trajectory bit-compatibly") {
    const std::string mid = (dir.path / "run1" / "ckpt_latest.ckpt").string();
    REQUIRE(fs::exists(mid));  // written at iteration 2
    const runner::TrainResult r3 =
        runner::train(m, cfg, (dir.path / "run3").string(), mid);
    REQUIRE(r3.loss_trajectory.size() == 2);  // steps 3 and 4
    CHECK(r3.loss_trajectory[0] == r1.loss_trajectory[2]);
    CHECK(r3.loss_trajectory[1] == r1.loss_trajectory[3]);
  }
  SUBCASE("final checkpoint carries metadata") {
    model::Vfi360Net net(checkpoint::peek_config(r1.final_checkpoint));
    const checkpoint::Loaded loaded = checkpoint::load(r1.final_checkpoint, &net);
    CHECK(loaded.meta.iteration == 4);
    CHECK(loaded.meta.has_optimizer_state);
    CHECK(loaded.meta.config_fingerprint == runner::config_fingerprint(cfg));
  }
}

TEST_CASE("training rejects empty manifests") {
  runner::TrainConfig cfg;
  CHECK_THROWS(runner::train(dataset::TripletManifest{}, cfg, "unused"));
}

TEST_CASE("ablation matrix trains all four variants with correct flags") {
  TempDir dir("ablate");
  const dataset::TripletManifest m = make_manifest(dir.path / "data", 1);

  runner::TrainConfig cfg;
  cfg.iterations = 1;
  cfg.batch_size = 1;
  cfg.seed = 3;

  const runner::AblateResult res = runner::ablate(m, m, cfg, (dir.path / "out").string());
  REQUIRE(res.variants.size() == 4);
  CHECK(res.all_ok());

  // row order: neither, guard only, ftb only, both
  const bool want_guard[4] = {false, true, false, true};
  const bool want_ftb[4] = {false, false, true, true};
  for (size_t i = 0; i < 4; ++i) {
    CHECK(res.variants[i].guard == want_guard[i]);
    CHECK(res.variants[i].ftb == want_ftb[i]);
    const model::ModelConfig mc = checkpoint::peek_config(res.variants[i].checkpoint);
    CHECK(mc.guard == want_guard[i]);
    CHECK(mc.ftb == want_ftb[i]);
    CHECK_FALSE(res.variants[i].report.rows.empty());
  }
}
