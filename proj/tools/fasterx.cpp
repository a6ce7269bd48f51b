/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
// fasterx: train, eval, profile, predict, synth-data, plot.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "CLI11.hpp"
#include "fasterx/eval.hpp"
#include "fasterx/plot.hpp"
#include "fasterx/profiler.hpp"
#include "fasterx/train.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace fasterx;

namespace {

using Pairs = std::vector<std::pair<std::string, std::string>>;

// Shared layered-config options: --config FILE, --set k=v, and bare
// --section.key=value flags collected from the leftovers.
struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;
};

void add_config_args(CLI::App* cmd, ConfigArgs& a) {
  cmd->add_option("--config", a.file, "key=value config file");
  cmd->add_option("--set", a.sets, "override, key=value (repeatable)");
  cmd->allow_extras();
}

Pairs collect_pairs(const CLI::App* cmd, const ConfigArgs& a) {
  Pairs out;
  if (!a.file.empty()) out = read_config_pairs(a.file);
  auto split = [](const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("expected key=value, got '" + kv + "'");
    return std::pair{kv.substr(0, eq), kv.substr(eq + 1)};
  };
  for (const auto& s : a.sets) out.push_back(split(s));
  const auto extra = cmd->remaining();
  for (size_t i = 0; i < extra.size(); ++i) {
    const std::string& tok = extra[i];
    if (tok.rfind("--", 0) != 0 || tok.find('.') == std::string::npos) {
      throw std::invalid_argument("unrecognised argument '" + tok + "'");
    }
    const std::string body = tok.substr(2);
    if (body.find('=') != std::string::npos) {
      out.push_back(split(body));
    } else if (i + 1 < extra.size()) {
      out.emplace_back(body, extra[++i]);
    } else {
      throw std::invalid_argument("missing value for '" + tok + "'");
    }
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

nlohmann::json metrics_json(const EvalResult& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  return {{"mAP", r.map},         {"AP50", r.ap50},         {"AP75", r.ap75},
          {"AP_S", opt(r.ap_small)}, {"AP_M", opt(r.ap_medium)}, {"AP_L", opt(r.ap_large)},
          {"num_gts", r.num_gts}, {"num_dets", r.num_dets}};
}

// --- train ----------------------------------------------------------------------

int cmd_train(const CLI::App* cmd, const ConfigArgs& ca, const std::string& run_dir_flag) {
  Pairs pairs = collect_pairs(cmd, ca);
  if (const char* env = std::getenv("FASTERX_RUN_DIR"); env && *env) pairs.insert(pairs.begin(), {"run.dir", env});
  if (!run_dir_flag.empty()) pairs.emplace_back("run.dir", run_dir_flag);
  RunConfig cfg = RunConfig::resolve(pairs);
  if (cfg.run_dir.empty()) cfg.run_dir = "runs/train";
  tune_allocator();
  auto train = load_split(cfg.data, false, cfg.model.num_classes);
  auto val = load_split(cfg.data, true, cfg.model.num_classes);
  std::cerr << "train: " << train.size() << " images, val: " << val.size() << " images, run dir "
            << cfg.run_dir << "\n";
  Trainer trainer(cfg, std::move(train), std::move(val));
  const auto logs = trainer.fit(&std::cout);
  if (!logs.empty() && logs.back().eval) std::cerr << format_metrics(*logs.back().eval) << "\n";
  return 0;
}

// --- eval ------------------------------------------------------------------------

int cmd_eval(const CLI::App* cmd, const ConfigArgs& ca, const std::string& checkpoint,
             const std::string& dets_path, const std::string& gt_manifest, const std::string& out_dir,
             const std::string& dump_path) {
  RunConfig cfg = RunConfig::resolve(collect_pairs(cmd, ca));
  EvalResult r;
  if (!dets_path.empty()) {
    if (gt_manifest.empty()) throw std::invalid_argument("--dets needs --gt MANIFEST");
    std::ifstream in(dets_path);
    if (!in) throw std::runtime_error("cannot open " + dets_path);
    ImageDetections dets = read_detections(in, dets_path);
    const auto samples = load_dataset(gt_manifest, cfg.model.num_classes);
    if (dets.size() > samples.size()) {
      throw std::invalid_argument("detection dump names image " + std::to_string(dets.size() - 1) +
                                  " but the manifest has " + std::to_string(samples.size()));
    }
    r = evaluate(dets, targets_of(samples));
  } else {
    if (checkpoint.empty()) throw std::invalid_argument("eval needs --checkpoint or --dets");
    auto model = strip_aux(*load_checkpoint(checkpoint));
    cfg.model = model->config();
    const DataConfig data = cfg.data;
    const auto samples = gt_manifest.empty() ? load_split(data, true, cfg.model.num_classes)
                                             : load_dataset(gt_manifest, cfg.model.num_classes);
    const ImageDetections dets = predict_samples(*model, samples, cfg.eval);
    if (!dump_path.empty()) {
      std::ofstream out(dump_path);
      write_detections(out, dets);
    }
    r = evaluate(dets, targets_of(samples));
  }
  std::cout << format_metrics(r) << "\n";
  if (!out_dir.empty()) {
    write_text(fs::path(out_dir) / "metrics.json", metrics_json(r).dump(2) + "\n");
    write_text(fs::path(out_dir) / "config.txt", cfg.to_text());
  }
  return 0;
}

// --- profile ---------------------------------------------------------------------

CostReport profile_config(const ModelConfig& c, const std::string& name, int depth) {
  Detector m(c, 0);
  CostReport r = profile_model(m, c.input_size, depth);
  r.name = name;
  return r;
}

int cmd_profile(const CLI::App* cmd, const ConfigArgs& ca, std::string preset, int size,
                const std::string& compare, bool timing, int reps, int depth, const std::string& out_dir) {
  // Profiles use the preset's own input size unless one is given.
  Pairs pairs = collect_pairs(cmd, ca);
  bool size_set = size > 0;
  for (const auto& [k, v] : pairs) {
    if (k == "model.preset") preset = v;
    size_set |= k == "model.input_size";
  }
  if (preset.empty()) preset = "fasterx-s";
  pairs.insert(pairs.begin(), {"model.preset", preset});
  if (!size_set) pairs.insert(pairs.begin() + 1, {"model.input_size", std::to_string(ModelConfig::preset(preset).input_size)});
  if (size > 0) pairs.emplace_back("model.input_size", std::to_string(size));
  RunConfig cfg = RunConfig::resolve(pairs);

  const CostReport r = profile_config(cfg.model, preset, depth);
  std::ostringstream report;
  report << format_report(r) << format_report_line(r) << "\n";
  if (!compare.empty()) {
    ModelConfig other = ModelConfig::preset(compare);
    other.input_size = cfg.model.input_size;
    const CostReport o = profile_config(other, compare, depth);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "compare %s vs %s @%d: params %.3fM vs %.3fM (delta %+.3fM, %+.1f%%), GFLOPs %.3f vs %.3f "
                  "(delta %+.3f, %+.1f%%)\n",
                  r.name.c_str(), compare.c_str(), r.input_size, r.params_m(), o.params_m(),
                  r.params_m() - o.params_m(), 100.0 * (r.params - o.params) / o.params, r.gflops(),
                  o.gflops(), r.gflops() - o.gflops(), 100.0 * (r.flop_units - o.flop_units) / o.flop_units);
    report << buf;
  }
  if (timing) {
    Detector m(cfg.model, 0);
    const LatencyStats s = time_forward(m, cfg.model.input_size, reps, 2);
    char buf[160];
    std::snprintf(buf, sizeof buf, "latency @%d: mean %.2f ms, p50 %.2f ms, p95 %.2f ms over %d reps\n",
                  cfg.model.input_size, s.mean_ms, s.p50_ms, s.p95_ms, s.reps);
    report << buf;
  }
  std::cout << report.str();
  if (!out_dir.empty()) {
    write_text(fs::path(out_dir) / "profile.txt", report.str());
    write_text(fs::path(out_dir) / "config.txt", cfg.to_text());
  }
  return 0;
}

// --- predict ---------------------------------------------------------------------

int cmd_predict(const CLI::App* cmd, const ConfigArgs& ca, const std::string& checkpoint,
                const std::vector<std::string>& images, double score_thr, double nms_thr,
                const std::string& out_dir, bool overlay) {
  RunConfig cfg = RunConfig::resolve(collect_pairs(cmd, ca));
  if (checkpoint.empty()) throw std::invalid_argument("predict needs --checkpoint");
  if (images.empty()) throw std::invalid_argument("predict needs at least one image");
  auto model = strip_aux(*load_checkpoint(checkpoint));
  cfg.model = model->config();
  cfg.eval.score_thr = score_thr;
  cfg.eval.nms_thr = nms_thr;
  cfg.eval.batch_size = 1;
  std::vector<Sample> samples;
  for (const auto& p : images) {
    Sample s;
    s.image = cv::imread(p, cv::IMREAD_COLOR);
    if (s.image.empty()) throw std::runtime_error("cannot read image " + p);
    samples.push_back(std::move(s));
  }
  const ImageDetections dets = predict_samples(*model, samples, cfg.eval);
  const fs::path out = out_dir.empty() ? fs::path("predictions") : fs::path(out_dir);
  fs::create_directories(out);
  {
    std::ofstream f(out / "detections.txt");
    write_detections(f, dets);
  }
  write_text(out / "images.txt", [&] {
    std::string s;
    for (size_t i = 0; i < images.size(); ++i) s += std::to_string(i) + " " + images[i] + "\n";
    return s;
  }());
  write_text(out / "config.txt", cfg.to_text());
  if (overlay) {
    for (size_t i = 0; i < samples.size(); ++i) {
      cv::Mat img = samples[i].image.clone();
      for (const auto& d : dets[i]) {
        cv::rectangle(img, cv::Point(static_cast<int>(d.box.x1), static_cast<int>(d.box.y1)),
                      cv::Point(static_cast<int>(d.box.x2), static_cast<int>(d.box.y2)),
                      cv::Scalar(0, 255, 0), 1);
        cv::putText(img, std::to_string(d.cls), cv::Point(static_cast<int>(d.box.x1), static_cast<int>(d.box.y1) - 2),
                    cv::FONT_HERSHEY_SIMPLEX, 0.3, cv::Scalar(0, 255, 0), 1);
      }
      char name[32];
      std::snprintf(name, sizeof name, "%05zu.png", i);
      cv::imwrite((out / name).string(), img);
    }
  }
  size_t n = 0;
  for (const auto& d : dets) n += d.size();
  std::cout << n << " detections over " << images.size() << " images written to " << out.string() << "\n";
  return 0;
}

// --- synth-data --------------------------------------------------------------------

int cmd_synth(const std::string& out_dir, int num, uint64_t seed, int size, int classes) {
  if (out_dir.empty()) throw std::invalid_argument("synth-data needs --out");
  SynthSpec spec;
  spec.num_images = num;
  spec.seed = seed;
  spec.image_size = size;
  spec.num_classes = classes;
  const auto samples = synth_dataset(spec);
  write_dataset(samples, out_dir);
  std::ostringstream cfg;
  cfg << "data.synth_image_size=" << size << "\ndata.synth_images=" << num << "\ndata.synth_seed=" << seed
      << "\nmodel.num_classes=" << classes << "\n";
  write_text(fs::path(out_dir) / "config.txt", cfg.str());
  size_t boxes = 0;
  for (const auto& s : samples) boxes += s.targets.size();
  std::cout << samples.size() << " images, " << boxes << " boxes written to " << out_dir << "\n";
  return 0;
}

// --- plot ----------------------------------------------------------------------------

int cmd_plot(const std::vector<std::string>& logs, std::vector<std::string> labels,
             const std::vector<std::string>& metrics, const std::string& out_dir) {
  if (logs.empty()) throw std::invalid_argument("plot needs at least one --log");
  if (!labels.empty() && labels.size() != logs.size()) {
    throw std::invalid_argument("--label must be given once per --log");
  }
  if (labels.empty()) {
    for (const auto& l : logs) {
      const fs::path p(l);
      labels.push_back(p.has_parent_path() ? p.parent_path().filename().string() : p.stem().string());
    }
  }
  const fs::path out = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  fs::create_directories(out);
  for (const auto& metric : metrics) {
    std::vector<Series> series;
    for (size_t i = 0; i < logs.size(); ++i) series.push_back(read_series(logs[i], metric, labels[i]));
    const fs::path png = out / (metric + ".png");
    const int n = render_plot(series, metric + " vs epoch", metric, png.string());
    std::cout << png.string() << ": " << n << " curves\n";
  }
  std::string cfg;
  for (size_t i = 0; i < logs.size(); ++i) cfg += "plot.log." + std::to_string(i) + "=" + logs[i] + "\n";
  write_text(out / "plot_config.txt", cfg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FasterX detector toolkit"};
  app.require_subcommand(1);

  ConfigArgs train_cfg;
  std::string run_dir;
  auto* train = app.add_subcommand("train", "train a detector (config keys: model.*, distill.*, train.*, ...)");
  add_config_args(train, train_cfg);
  train->add_option("--run-dir", run_dir, "output directory (also FASTERX_RUN_DIR)");

  ConfigArgs eval_cfg;
  std::string checkpoint, dets, gt, eval_out, dump;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint or a detection dump");
  add_config_args(eval, eval_cfg);
  eval->add_option("--checkpoint", checkpoint, "model checkpoint");
  eval->add_option("--dets", dets, "detection dump: image_id class score x1 y1 x2 y2");
  eval->add_option("--gt", gt, "ground-truth manifest (default: data.val)");
  eval->add_option("--out", eval_out, "directory for metrics.json");
  eval->add_option("--dump", dump, "write the model's detections here");

  ConfigArgs prof_cfg;
  std::string preset, compare, prof_out;
  int size = 0, reps = 10, depth = 2;
  bool timing = false;
  auto* prof = app.add_subcommand("profile", "parameter and FLOP accounting");
  add_config_args(prof, prof_cfg);
  prof->add_option("--preset", preset, "model preset (default fasterx-s)");
  prof->add_option("--size", size, "input size (default: the preset's)");
  prof->add_option("--compare", compare, "second preset to compare against");
  prof->add_flag("--time", timing, "measure forward latency");
  prof->add_option("--reps", reps, "timed repetitions")->check(CLI::PositiveNumber);
  prof->add_option("--depth", depth, "breakdown depth")->check(CLI::PositiveNumber);
  prof->add_option("--out", prof_out, "directory for profile.txt");

  ConfigArgs pred_cfg;
  std::string pred_ckpt, pred_out;
  std::vector<std::string> images;
  double score_thr = 0.3, nms_thr = 0.65;
  bool overlay = false;
  auto* pred = app.add_subcommand("predict", "run a checkpoint on images");
  add_config_args(pred, pred_cfg);
  pred->add_option("--checkpoint", pred_ckpt, "model checkpoint")->required();
  pred->add_option("images", images, "image files")->required();
  pred->add_option("--score-thr", score_thr, "score threshold");
  pred->add_option("--nms-thr", nms_thr, "NMS IoU threshold");
  pred->add_option("--out", pred_out, "output directory");
  pred->add_flag("--overlay", overlay, "write box-overlay images");

  std::string synth_out;
  int synth_num = 500, synth_size = 128, synth_classes = 10;
  uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth-data", "generate a synthetic small-object dataset");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--num", synth_num, "image count")->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--size", synth_size, "image side in pixels");
  synth->add_option("--classes", synth_classes, "class count");

  std::vector<std::string> logs, labels, metrics = {"AP50", "mAP"};
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "training curves from JSONL logs");
  plot->add_option("--log", logs, "log.jsonl (repeatable)")->required();
  plot->add_option("--label", labels, "curve label per log");
  plot->add_option("--metric", metrics, "metrics to plot");
  plot->add_option("--out", plot_out, "output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(train, train_cfg, run_dir);
    if (*eval) return cmd_eval(eval, eval_cfg, checkpoint, dets, gt, eval_out, dump);
    if (*prof) return cmd_profile(prof, prof_cfg, preset, size, compare, timing, reps, depth, prof_out);
    if (*pred) return cmd_predict(pred, pred_cfg, pred_ckpt, images, score_thr, nms_thr, pred_out, overlay);
    if (*synth) return cmd_synth(synth_out, synth_num, synth_seed, synth_size, synth_classes);
    if (*plot) return cmd_plot(logs, labels, metrics, plot_out);
  } catch (const std::exception& e) {
    std::cerr << "fasterx: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
