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

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "vfi360/checkpoint.hpp"
#include "vfi360/dataset.hpp"
#include "vfi360/erp_geometry.hpp"
#include "vfi360/image_io.hpp"
#include "vfi360/runner.hpp"

namespace fs = std::filesystem;
using namespace vfi360;

namespace {

runner::TrainConfig load_train_config(const std::string& config_path, bool toy) {
  runner::TrainConfig cfg;
  if (!config_path.empty()) {
    cfg = runner::train_config_from_kv(config::KeyValues::from_file(config_path));
  }
  if (toy) cfg = runner::toy_preset(cfg);
  return cfg;
}

int cmd_prepare(const std::string& root, const std::string& out_dir, const std::string& policy,
                const std::string& provider, uint64_t split_seed, double train_fraction,
                const std::string& source_tag, const std::string& cond_map_out, int cond_rows,
                int cond_cols) {
  fs::create_directories(out_dir);
  if (!cond_map_out.empty()) {
    erp::write_condition_map(erp::condition_map(cond_rows, cond_cols), cond_map_out);
    std::cout << "wrote condition map (" << cond_rows << "x" << cond_cols << ") to "
              << cond_map_out << "\n";
  }
  if (root.empty()) return 0;

  dataset::IngestOptions opts;
  opts.root = root;
  opts.policy = dataset::drop_policy_from_string(policy);
  opts.provider_spec = provider;
  opts.split_seed = split_seed;
  opts.train_fraction = train_fraction;
  opts.source_tag = source_tag;
  dataset::IngestResult res = dataset::ingest(opts);

  dataset::save_manifest(res.train, (fs::path(out_dir) / "manifest.train.jsonl").string());
  dataset::save_manifest(res.test, (fs::path(out_dir) / "manifest.test.jsonl").string());
  dataset::save_triplet_list(res.train, (fs::path(out_dir) / "tri_trainlist.txt").string());
  dataset::save_triplet_list(res.test, (fs::path(out_dir) / "tri_testlist.txt").string());

  std::cout << "train triplets: " << res.train.entries.size()
            << "  test triplets: " << res.test.entries.size() << "\n";
  std::cout << "buckets Easy/Middle/Hard/Extreme: " << res.bucket_counts[0] << "/"
            << res.bucket_counts[1] << "/" << res.bucket_counts[2] << "/" << res.bucket_counts[3]
            << "\n";
  for (const dataset::ClipError& e : res.errors) {
    std::cerr << "clip '" << e.clip << "' skipped: " << e.message << "\n";
  }
  return 0;
}

int cmd_stratify(const std::string& manifest_path) {
  dataset::TripletManifest m = dataset::load_manifest(manifest_path, /*check_files_exist=*/false);
  const std::array<int, 4> counts = dataset::stratify(m.entries);
  dataset::save_manifest(m, manifest_path);
  std::cout << "Easy " << counts[0] << ", Middle " << counts[1] << ", Hard " << counts[2]
            << ", Extreme " << counts[3] << "\n";
  return 0;
}

int cmd_train(const std::string& manifest_path, const std::string& config_path,
              const std::string& out_dir, const std::string& resume, bool toy,
              const std::string& val_manifest_path) {
  const dataset::TripletManifest m = dataset::load_manifest(manifest_path);
  const runner::TrainConfig cfg = load_train_config(config_path, toy);
  std::optional<dataset::TripletManifest> val;
  if (!val_manifest_path.empty()) val = dataset::load_manifest(val_manifest_path);
  const runner::TrainResult r =
      runner::train(m, cfg, out_dir, resume, val ? &*val : nullptr);
  std::cout << "ran " << r.iterations_run << " iterations, final loss "
            << (r.loss_trajectory.empty() ? 0.0 : r.loss_trajectory.back()) << "\n";
  std::cout << "final checkpoint: " << r.final_checkpoint << "\n";
  if (!r.best_checkpoint.empty()) std::cout << "best checkpoint: " << r.best_checkpoint << "\n";
  return 0;
}

int cmd_eval(const std::string& manifest_path, const std::string& ckpt,
             const std::string& predictions, const std::string& out_prefix) {
  const dataset::TripletManifest m = dataset::load_manifest(manifest_path);
  runner::EvalSource src;
  src.checkpoint = ckpt;
  src.predictions_dir = predictions;
  const runner::BenchmarkReport rep = runner::evaluate(m, src);
  runner::write_report_csv(rep, out_prefix + ".csv");
  runner::write_report_json(rep, out_prefix + ".json");
  for (const runner::SettingMean& sm : rep.means) {
    std::cout << sm.setting << " (" << sm.count << "): WS-PSNR " << sm.mean.ws_psnr
              << " dB, WS-SSIM " << sm.mean.ws_ssim << "\n";
  }
  for (const std::string& id : rep.missing_predictions) {
    std::cerr << "missing prediction for " << id << "\n";
  }
  return rep.missing_predictions.empty() ? 0 : 1;
}

int cmd_interpolate(const std::string& in1, const std::string& in2, const std::string& out,
                    const std::string& ckpt) {
  model::Vfi360Net net(checkpoint::peek_config(ckpt));
  checkpoint::load(ckpt, &net);
  const Tensor a = io::read_frame(in1);
  const Tensor b = io::read_frame(in2);
  io::write_frame(net.interpolate(a, b), out);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_ablate(const std::string& train_manifest, const std::string& test_manifest,
               const std::string& config_path, const std::string& out_dir, bool toy) {
  const dataset::TripletManifest tr = dataset::load_manifest(train_manifest);
  const dataset::TripletManifest te = dataset::load_manifest(test_manifest);
  const runner::TrainConfig cfg = load_train_config(config_path, toy);
  const runner::AblateResult res = runner::ablate(tr, te, cfg, out_dir);
  for (const runner::AblateVariant& v : res.variants) {
    std::cout << "guard=" << (v.guard ? "on" : "off") << " ftb=" << (v.ftb ? "on" : "off") << ": ";
    if (!v.ok) {
      std::cout << "ABORTED (" << v.error << ")\n";
      continue;
    }
    double ws = 0.0;
    int cnt = 0;
    for (const runner::SettingMean& sm : v.report.means) {
      ws += sm.mean.ws_psnr * sm.count;
      cnt += sm.count;
    }
    std::cout << "WS-PSNR " << (cnt ? ws / cnt : 0.0) << " dB (" << v.checkpoint << ")\n";
  }
  return res.all_ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vfi360: omnidirectional video frame interpolation toolkit"};
  app.require_subcommand(1);

  // prepare
  std::string root, out_dir = ".", policy = "drop_last_one", provider = "bm", source_tag;
  std::string cond_map_out;
  uint64_t split_seed = 0;
  double train_fraction = 0.8;
  int cond_rows = 1080, cond_cols = 2160;
  auto* prepare = app.add_subcommand("prepare", "Ingest a frame tree into triplet manifests");
  prepare->add_option("--root", root, "Directory of per-clip frame folders");
  prepare->add_option("--out", out_dir, "Output directory for manifests");
  prepare->add_option("--layout,--drop-policy", policy,
                      "none | drop_last_one | drop_first_and_last");
  prepare->add_option("--flow-provider", provider, "bm | oracle:<dx>,<dy>");
  prepare->add_option("--split-seed", split_seed, "Clip-level split seed");
  prepare->add_option("--train-fraction", train_fraction, "Fraction of clips used for training");
  prepare->add_option("--source-tag", source_tag, "Free-form provenance tag");
  prepare->add_option("--condition-map-out", cond_map_out,
                      "Export the distortion condition map (raw little-endian float32)");
  prepare->add_option("--condition-map-rows", cond_rows, "Rows for the exported map");
  prepare->add_option("--condition-map-cols", cond_cols, "Columns for the exported map");

  // stratify
  std::string manifest_path;
  auto* stratify = app.add_subcommand("stratify", "(Re)assign difficulty settings in a manifest");
  stratify->add_option("--manifest", manifest_path, "Manifest to rewrite in place")->required();

  // train
  std::string train_manifest, config_path, train_out = "runs/default", resume, val_manifest;
  bool toy = false;
  auto* train = app.add_subcommand("train", "Optimize the network on a manifest");
  train->add_option("--manifest", train_manifest)->required();
  train->add_option("--config", config_path, "Plain-text key=value config");
  train->add_option("--out", train_out, "Checkpoint directory");
  train->add_option("--resume", resume, "Checkpoint to resume from");
  train->add_option("--val-manifest", val_manifest, "Validation manifest (keeps best WS-PSNR)");
  train->add_flag("--toy", toy, "Desk-scale preset: 200 iterations, batch 1");

  // eval
  std::string eval_manifest, ckpt, predictions, out_prefix = "report";
  auto* eval = app.add_subcommand("eval", "Per-setting benchmark report (CSV + JSON)");
  eval->add_option("--manifest", eval_manifest)->required();
  eval->add_option("--ckpt", ckpt, "Checkpoint to run");
  eval->add_option("--predictions", predictions, "Directory of <sample_id>.png frames");
  eval->add_option("--out", out_prefix, "Report path prefix");

  // interpolate
  std::string in1, in2, out_frame, interp_ckpt;
  auto* interp = app.add_subcommand("interpolate", "Synthesize the middle frame of a pair");
  interp->add_option("--in1", in1)->required();
  interp->add_option("--in2", in2)->required();
  interp->add_option("--out", out_frame)->required();
  interp->add_option("--ckpt", interp_ckpt)->required();

  // ablate
  std::string ab_train, ab_test, ab_config, ab_out = "runs/ablation";
  bool ab_toy = false;
  auto* ablate = app.add_subcommand("ablate", "Train and benchmark all four module variants");
  ablate->add_option("--train-manifest", ab_train)->required();
  ablate->add_option("--test-manifest", ab_test)->required();
  ablate->add_option("--config", ab_config);
  ablate->add_option("--out", ab_out);
  ablate->add_flag("--toy", ab_toy, "Desk-scale preset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (prepare->parsed()) {
      return cmd_prepare(root, out_dir, policy, provider, split_seed, train_fraction, source_tag,
                         cond_map_out, cond_rows, cond_cols);
    }
    if (stratify->parsed()) return cmd_stratify(manifest_path);
    if (train->parsed()) {
      return cmd_train(train_manifest, config_path, train_out, resume, toy, val_manifest);
    }
    if (eval->parsed()) return cmd_eval(eval_manifest, ckpt, predictions, out_prefix);
    if (interp->parsed()) return cmd_interpolate(in1, in2, out_frame, interp_ckpt);
    if (ablate->parsed()) return cmd_ablate(ab_train, ab_test, ab_config, ab_out, ab_toy);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
