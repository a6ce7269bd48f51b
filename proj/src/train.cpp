/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/train.hpp"

#include <malloc.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fasterx {

namespace fs = std::filesystem;

namespace {

uint64_t mix(uint64_t a, uint64_t b) {
  uint64_t x = a * 0x9e3779b97f4a7c15ULL + b + 0x632be59bd9b4e019ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int to_int(const std::string& key, const std::string& v) {
  size_t used = 0;
  int out = 0;
  try {
    out = std::stoi(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": expected an integer, got '" + v + "'");
  return out;
}

uint64_t to_u64(const std::string& key, const std::string& v) {
  size_t used = 0;
  uint64_t out = 0;
  try {
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || v[0] == '-') {
    throw std::invalid_argument(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out)) {
    throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument(key + ": expected true/false, got '" + v + "'");
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

void apply(RunConfig& c, const std::string& key, const std::string& v) {
  auto starts = [&](const char* p) { return key.rfind(p, 0) == 0; };
  if (key == "model.preset") {
    const DistillConfig keep = c.model.distill;
    c.model = ModelConfig::preset(v);
    c.model.distill = keep;
  } else if (starts("model.distill.")) {
    c.model.set(key.substr(6), v);
  } else if (starts("distill.")) {
    c.model.set(key, v);
  } else if (starts("model.")) {
    c.model.set(key.substr(6), v);
  } else if (key == "train.epochs") c.train.epochs = to_int(key, v);
  else if (key == "train.batch_size") c.train.batch_size = to_int(key, v);
  else if (key == "train.lr") c.train.lr = to_double(key, v);
  else if (key == "train.momentum") c.train.momentum = to_double(key, v);
  else if (key == "train.nesterov") c.train.nesterov = to_bool(key, v);
  else if (key == "train.weight_decay") c.train.weight_decay = to_double(key, v);
  else if (key == "train.warmup_epochs") c.train.warmup_epochs = to_int(key, v);
  else if (key == "train.min_lr_ratio") c.train.min_lr_ratio = to_double(key, v);
  else if (key == "train.mosaic_prob") c.train.mosaic_prob = to_double(key, v);
  else if (key == "train.mosaic_scale_min") c.train.mosaic_scale_min = to_double(key, v);
  else if (key == "train.mosaic_scale_max") c.train.mosaic_scale_max = to_double(key, v);
  else if (key == "train.eval_every") c.train.eval_every = to_int(key, v);
  else if (key == "train.seed") c.train.seed = to_u64(key, v);
  else if (key == "train.fast_matmul") c.train.fast_matmul = to_bool(key, v);
  else if (key == "assign.cost") c.assign.cost = parse_cost_mode(v);
  else if (key == "assign.alpha") c.assign.alpha = to_double(key, v);
  else if (key == "assign.radius") c.assign.radius = to_double(key, v);
  else if (key == "assign.top_q") c.assign.top_q = to_int(key, v);
  else if (key == "assign.focal_gamma") c.assign.focal_gamma = c.loss.focal_gamma = to_double(key, v);
  else if (key == "assign.focal_alpha") c.assign.focal_alpha = c.loss.focal_alpha = to_double(key, v);
  else if (key == "loss.reg_weight") c.loss.reg_weight = to_double(key, v);
  else if (key == "data.train") c.data.train = v;
  else if (key == "data.val") c.data.val = v;
  else if (key == "data.synth_train_images") c.data.synth_train_images = to_int(key, v);
  else if (key == "data.synth_val_images") c.data.synth_val_images = to_int(key, v);
  else if (key == "data.synth_image_size") c.data.synth_image_size = to_int(key, v);
  else if (key == "data.synth_seed") c.data.synth_seed = to_u64(key, v);
  else if (key == "data.synth_val_seed") c.data.synth_val_seed = to_u64(key, v);
  else if (key == "eval.score_thr") c.eval.score_thr = to_double(key, v);
  else if (key == "eval.nms_thr") c.eval.nms_thr = to_double(key, v);
  else if (key == "eval.batch_size") c.eval.batch_size = to_int(key, v);
  else if (key == "run.dir") c.run_dir = v;
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

}  // namespace

// --- configuration -----------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> RunConfig::default_pairs() {
  return {{"model.preset", "fasterx-nano"}, {"model.input_size", "128"}, {"distill.warmup_epochs", "5"}};
}

RunConfig RunConfig::defaults() { return resolve({}); }

RunConfig RunConfig::resolve(const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::vector<std::pair<std::string, std::string>> all = default_pairs();
  all.insert(all.end(), overrides.begin(), overrides.end());
  RunConfig c;
  // The last preset wins and goes first so explicit model keys refine it.
  for (auto it = all.rbegin(); it != all.rend(); ++it) {
    if (it->first == "model.preset") {
      apply(c, it->first, it->second);
      break;
    }
  }
  for (const auto& [k, v] : all) {
    if (k != "model.preset") apply(c, k, v);
  }
  c.validate();
  return c;
}

void RunConfig::validate() const {
  model.validate();
  auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
  if (train.epochs < 0) fail("train.epochs must be >= 0");
  if (train.batch_size < 1) fail("train.batch_size must be >= 1");
  if (train.lr <= 0) fail("train.lr must be > 0");
  if (train.momentum < 0 || train.momentum >= 1) fail("train.momentum must be in [0, 1)");
  if (train.weight_decay < 0) fail("train.weight_decay must be >= 0");
  if (train.warmup_epochs < 0) fail("train.warmup_epochs must be >= 0");
  if (train.mosaic_prob < 0 || train.mosaic_prob > 1) fail("train.mosaic_prob must be in [0, 1]");
  if (train.mosaic_scale_min <= 0 || train.mosaic_scale_max < train.mosaic_scale_min) {
    fail("train.mosaic_scale_min/max must satisfy 0 < min <= max");
  }
  if (train.eval_every < 0) fail("train.eval_every must be >= 0");
  if (model.distill.warmup_epochs < 0) fail("distill.warmup_epochs must be >= 0");
  if (model.distill.lambda < 0) fail("distill.lambda must be >= 0");
  if (assign.top_q < 1) fail("assign.top_q must be >= 1");
  if (eval.batch_size < 1) fail("eval.batch_size must be >= 1");
}

std::string RunConfig::to_text() const {
  std::map<std::string, std::string> kv;
  std::istringstream in(model.to_text());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string k = line.substr(0, eq);
    kv[k.rfind("distill.", 0) == 0 ? k : "model." + k] = line.substr(eq + 1);
  }
  kv["train.epochs"] = std::to_string(train.epochs);
  kv["train.batch_size"] = std::to_string(train.batch_size);
  kv["train.lr"] = fmt(train.lr);
  kv["train.momentum"] = fmt(train.momentum);
  kv["train.nesterov"] = train.nesterov ? "true" : "false";
  kv["train.weight_decay"] = fmt(train.weight_decay);
  kv["train.warmup_epochs"] = std::to_string(train.warmup_epochs);
  kv["train.min_lr_ratio"] = fmt(train.min_lr_ratio);
  kv["train.mosaic_prob"] = fmt(train.mosaic_prob);
  kv["train.mosaic_scale_min"] = fmt(train.mosaic_scale_min);
  kv["train.mosaic_scale_max"] = fmt(train.mosaic_scale_max);
  kv["train.eval_every"] = std::to_string(train.eval_every);
  kv["train.seed"] = std::to_string(train.seed);
  kv["train.fast_matmul"] = train.fast_matmul ? "true" : "false";
  kv["assign.cost"] = to_string(assign.cost);
  kv["assign.alpha"] = fmt(assign.alpha);
  kv["assign.radius"] = fmt(assign.radius);
  kv["assign.top_q"] = std::to_string(assign.top_q);
  kv["assign.focal_gamma"] = fmt(assign.focal_gamma);
  kv["assign.focal_alpha"] = fmt(assign.focal_alpha);
  kv["loss.reg_weight"] = fmt(loss.reg_weight);
  kv["data.train"] = data.train;
  kv["data.val"] = data.val;
  kv["data.synth_train_images"] = std::to_string(data.synth_train_images);
  kv["data.synth_val_images"] = std::to_string(data.synth_val_images);
  kv["data.synth_image_size"] = std::to_string(data.synth_image_size);
  kv["data.synth_seed"] = std::to_string(data.synth_seed);
  kv["data.synth_val_seed"] = std::to_string(data.synth_val_seed);
  kv["eval.score_thr"] = fmt(eval.score_thr);
  kv["eval.nms_thr"] = fmt(eval.nms_thr);
  kv["eval.batch_size"] = std::to_string(eval.batch_size);
  kv["run.dir"] = run_dir;
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_config_pairs(const std::string& text,
                                                                    const std::string& source) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_config_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_pairs(ss.str(), path);
}

// --- optimisation ---------------------------------------------------------------------

double learning_rate(const TrainConfig& cfg, int64_t iter, int64_t iters_per_epoch) {
  const int64_t total = std::max<int64_t>(1, static_cast<int64_t>(cfg.epochs) * iters_per_epoch);
  const int64_t warm = std::min<int64_t>(total, static_cast<int64_t>(cfg.warmup_epochs) * iters_per_epoch);
  if (iter < warm) {
    const double f = static_cast<double>(iter + 1) / warm;
    return cfg.lr * f * f;
  }
  const double min_lr = cfg.lr * cfg.min_lr_ratio;
  const double span = static_cast<double>(std::max<int64_t>(1, total - warm));
  const double t = std::min(1.0, static_cast<double>(iter - warm) / span);
  return min_lr + 0.5 * (cfg.lr - min_lr) * (1.0 + std::cos(std::numbers::pi * t));
}

Sgd::Sgd(NamedTensors params, double momentum, bool nesterov, double weight_decay)
    : params_(std::move(params)), momentum_(momentum), weight_decay_(weight_decay), nesterov_(nesterov) {
  for (const auto& [name, t] : params_) velocity_.emplace_back(t.numel(), 0.0);
}

void Sgd::step(double lr) {
  for (size_t p = 0; p < params_.size(); ++p) {
    Tensor& w = params_[p].second;
    if (!w.has_grad()) continue;
    auto data = w.data();
    auto grad = w.grad();
    auto& vel = velocity_[p];
    const double wd = w.rank() == 4 ? weight_decay_ : 0.0;
    for (size_t i = 0; i < data.size(); ++i) {
      const double g = grad[i] + wd * data[i];
      vel[i] = momentum_ * vel[i] + g;
      data[i] -= lr * (nesterov_ ? g + momentum_ * vel[i] : vel[i]);
    }
  }
}

void Sgd::zero_grad() {
  for (auto& [name, t] : params_) t.zero_grad();
}

NamedTensors Sgd::state() const {
  NamedTensors out;
  for (size_t p = 0; p < params_.size(); ++p) {
    out.emplace_back("opt.momentum." + params_[p].first,
                     Tensor::from_vector(params_[p].second.shape(), velocity_[p]));
  }
  return out;
}

void Sgd::load_state(const NamedTensors& state) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& [n, t] : state) by_name[n] = &t;
  for (size_t p = 0; p < params_.size(); ++p) {
    auto it = by_name.find("opt.momentum." + params_[p].first);
    if (it == by_name.end()) continue;
    if (it->second->numel() != static_cast<int64_t>(velocity_[p].size())) {
      throw std::invalid_argument("optimizer state shape mismatch for " + params_[p].first);
    }
    auto d = it->second->data();
    velocity_[p].assign(d.begin(), d.end());
  }
}

// --- logs -------------------------------------------------------------------------------

std::string to_json_line(const EpochLog& log) {
  nlohmann::json j;
  j["epoch"] = log.epoch;
  j["phase"] = to_string(log.phase);
  j["lr"] = log.lr;
  j["steps"] = log.steps;
  j["loss"] = log.loss;
  j["cls"] = log.cls;
  j["reg"] = log.reg;
  j["obj"] = log.obj;
  j["num_fg"] = log.num_fg;
  if (log.aux_loss) {
    j["aux_loss"] = *log.aux_loss;
    j["aux_cls"] = log.aux_cls.value_or(0.0);
    j["aux_reg"] = log.aux_reg.value_or(0.0);
    j["aux_obj"] = log.aux_obj.value_or(0.0);
    j["align"] = log.align.value_or(0.0);
  }
  j["assign_calls"] = log.assign_calls;
  j["seconds"] = log.seconds;
  if (log.eval) {
    j["mAP"] = log.eval->map;
    j["AP50"] = log.eval->ap50;
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
    j["AP_S"] = opt(log.eval->ap_small);
    j["AP_M"] = opt(log.eval->ap_medium);
    j["AP_L"] = opt(log.eval->ap_large);
  }
  return j.dump();
}

// --- data plumbing ------------------------------------------------------------------------

std::vector<Sample> load_split(const DataConfig& cfg, bool validation, int num_classes) {
  const std::string& src = validation ? cfg.val : cfg.train;
  if (src == "synth") {
    SynthSpec spec;
    spec.image_size = cfg.synth_image_size;
    spec.num_images = validation ? cfg.synth_val_images : cfg.synth_train_images;
    spec.seed = validation ? cfg.synth_val_seed : cfg.synth_seed;
    spec.num_classes = num_classes;
    return synth_dataset(spec);
  }
  if (src.empty()) return {};
  return load_dataset(src, num_classes);
}

ImageTargets targets_of(const std::vector<Sample>& samples) {
  ImageTargets out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.targets);
  return out;
}

ImageDetections predict_samples(Detector& model, const std::vector<Sample>& samples,
                                const EvalConfig& cfg) {
  const int size = model.config().input_size;
  ImageDetections out;
  out.reserve(samples.size());
  for (size_t start = 0; start < samples.size(); start += cfg.batch_size) {
    const size_t end = std::min(samples.size(), start + cfg.batch_size);
    std::vector<cv::Mat> imgs;
    std::vector<LetterboxInfo> infos(end - start);
    for (size_t i = start; i < end; ++i) imgs.push_back(letterbox(samples[i].image, size, infos[i - start]));
    auto dets = predict(model, to_tensor(imgs), cfg.score_thr, cfg.nms_thr);
    for (size_t i = 0; i < dets.size(); ++i) {
      for (auto& d : dets[i]) d.box = unletterbox_box(d.box, infos[i]);
      out.push_back(std::move(dets[i]));
    }
  }
  return out;
}

// --- trainer --------------------------------------------------------------------------------

void tune_allocator() {
  // Keep large activation buffers in the heap instead of mmap/munmap per op.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
}

Trainer::Trainer(RunConfig cfg, std::vector<Sample> train, std::vector<Sample> val)
    : cfg_(std::move(cfg)),
      train_(std::move(train)),
      val_(std::move(val)),
      model_(cfg_.model, cfg_.train.seed),
      opt_(model_.named_parameters(), cfg_.train.momentum, cfg_.train.nesterov, cfg_.train.weight_decay) {
  cfg_.validate();
  if (train_.empty()) throw std::invalid_argument("trainer: empty training set");
  if (static_cast<int>(train_.size()) < cfg_.train.batch_size) {
    throw std::invalid_argument("trainer: fewer training images than one batch");
  }
}

int Trainer::steps_per_epoch() const {
  return static_cast<int>(train_.size()) / cfg_.train.batch_size;
}

std::vector<int> Trainer::order(int epoch) const {
  std::vector<int> idx(train_.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(mix(cfg_.train.seed, 0x5eed0000ULL + static_cast<uint64_t>(epoch)));
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

Sample Trainer::augmented(int epoch, int index) const {
  const int size = cfg_.model.input_size;
  Rng rng(mix(mix(cfg_.train.seed, static_cast<uint64_t>(epoch)), static_cast<uint64_t>(index)));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (cfg_.train.mosaic_prob > 0 && u(rng) < cfg_.train.mosaic_prob) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(train_.size()) - 1);
    const Sample* four[4] = {&train_[index], &train_[pick(rng)], &train_[pick(rng)], &train_[pick(rng)]};
    // Random quadrant for the anchor image.
    std::swap(four[0], four[std::uniform_int_distribution<int>(0, 3)(rng)]);
    return mosaic(four, size, rng, cfg_.train.mosaic_scale_min, cfg_.train.mosaic_scale_max).sample;
  }
  const Sample& s = train_[index];
  if (s.image.rows == size && s.image.cols == size) return s;
  Sample out;
  LetterboxInfo info;
  out.image = letterbox(s.image, size, info);
  for (const auto& t : s.targets) out.targets.push_back({letterbox_box(t.box, info), t.cls});
  return out;
}

std::pair<Tensor, ImageTargets> Trainer::batch(int epoch, int step) const {
  const auto idx = order(epoch);
  std::vector<cv::Mat> imgs;
  ImageTargets targets;
  for (int b = 0; b < cfg_.train.batch_size; ++b) {
    Sample s = augmented(epoch, idx[static_cast<size_t>(step) * cfg_.train.batch_size + b]);
    imgs.push_back(s.image);
    targets.push_back(std::move(s.targets));
  }
  return {to_tensor(imgs), std::move(targets)};
}

EvalResult Trainer::evaluate_val() {
  const MatmulPrecision prev = matmul_precision();
  set_matmul_precision(MatmulPrecision::kFloat64);
  const auto dets = predict_samples(model_, val_, cfg_.eval);
  set_matmul_precision(prev);
  model_.train(true);
  return evaluate(dets, targets_of(val_));
}

EpochLog Trainer::run_epoch(int epoch) {
  const auto t0 = std::chrono::steady_clock::now();
  const MatmulPrecision prev = matmul_precision();
  if (cfg_.train.fast_matmul) set_matmul_precision(MatmulPrecision::kFloat32);
  model_.train(true);
  EpochLog log;
  log.epoch = epoch;
  log.phase = phase_for_epoch(cfg_.model.distill, epoch);
  const int steps = steps_per_epoch();
  double aux_loss = 0, aux_cls = 0, aux_reg = 0, aux_obj = 0, align = 0;
  for (int s = 0; s < steps; ++s) {
    auto [images, targets] = batch(epoch, s);
    const double lr = learning_rate(cfg_.train, iter_, steps);
    StepResult r = training_step(model_, images, targets, epoch, cfg_.assign, cfg_.loss);
    const double loss = r.loss.item();
    if (!std::isfinite(loss)) {
      throw std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) + " step " +
                               std::to_string(s));
    }
    opt_.zero_grad();
    r.loss.backward();
    opt_.step(lr);
    ++iter_;
    log.lr = lr;
    log.loss += loss;
    log.cls += r.student.cls;
    log.reg += r.student.reg;
    log.obj += r.student.obj;
    log.num_fg += r.student.num_fg;
    log.assign_calls += r.assign_calls;
    if (r.aux) {
      aux_loss += r.aux->total_value();
      aux_cls += r.aux->cls;
      aux_reg += r.aux->reg;
      aux_obj += r.aux->obj;
      align += r.align;
    }
  }
  set_matmul_precision(prev);
  log.steps = steps;
  const double n = std::max(1, steps);
  log.loss /= n;
  log.cls /= n;
  log.reg /= n;
  log.obj /= n;
  log.num_fg /= n * cfg_.train.batch_size;
  if (log.phase != TrainPhase::kPlain) {
    log.aux_loss = aux_loss / n;
    log.aux_cls = aux_cls / n;
    log.aux_reg = aux_reg / n;
    log.aux_obj = aux_obj / n;
    log.align = align / n;
  }
  const bool last = epoch + 1 == cfg_.train.epochs;
  const bool cadence = cfg_.train.eval_every > 0 && (epoch + 1) % cfg_.train.eval_every == 0;
  if (!val_.empty() && (last || cadence)) log.eval = evaluate_val();
  log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return log;
}

std::vector<EpochLog> Trainer::fit(std::ostream* progress) {
  std::ofstream jsonl;
  if (!cfg_.run_dir.empty()) {
    fs::create_directories(cfg_.run_dir);
    std::ofstream(fs::path(cfg_.run_dir) / "config.txt") << cfg_.to_text();
    jsonl.open(fs::path(cfg_.run_dir) / "log.jsonl", std::ios::trunc);
    if (!jsonl) throw std::runtime_error("cannot write log in " + cfg_.run_dir);
  }
  std::vector<EpochLog> logs;
  double best = -1;
  for (int e = 0; e < cfg_.train.epochs; ++e) {
    logs.push_back(run_epoch(e));
    const std::string line = to_json_line(logs.back());
    if (progress) *progress << line << std::endl;
    if (cfg_.run_dir.empty()) continue;
    jsonl << line << '\n' << std::flush;
    TrainState st;
    st.epoch = e;
    st.tensors = opt_.state();
    st.tensors.emplace_back("opt.iter", Tensor::scalar(static_cast<double>(iter_)));
    save_checkpoint(model_, (fs::path(cfg_.run_dir) / "last.ckpt").string(), &st);
    if (logs.back().eval && logs.back().eval->ap50 > best) {
      best = logs.back().eval->ap50;
      save_checkpoint(model_, (fs::path(cfg_.run_dir) / "best.ckpt").string(), &st);
    }
  }
  return logs;
}

}  // namespace fasterx
