/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/model.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fasterx/ops.hpp"

namespace fasterx {

// --- enums ------------------------------------------------------------------

std::string to_string(Profile p) {
  switch (p) {
    case Profile::kS: return "s";
    case Profile::kTiny: return "tiny";
    case Profile::kNano: return "nano";
  }
  return "?";
}

std::string to_string(NeckMode m) { return m == NeckMode::kPAFPN ? "pafpn" : "slimfpn"; }

Profile parse_profile(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), ::tolower);
  if (l == "s") return Profile::kS;
  if (l == "tiny") return Profile::kTiny;
  if (l == "nano") return Profile::kNano;
  throw std::invalid_argument("unknown profile '" + s + "' (s|tiny|nano)");
}

NeckMode parse_neck_mode(const std::string& s) {
  if (s == "pafpn" || s == "panet") return NeckMode::kPAFPN;
  if (s == "slimfpn") return NeckMode::kSlimFPN;
  throw std::invalid_argument("unknown neck '" + s + "' (pafpn|slimfpn)");
}

// --- ModelConfig --------------------------------------------------------------

double ModelConfig::depth() const { return 0.33; }

double ModelConfig::width() const {
  switch (profile) {
    case Profile::kS: return 0.50;
    case Profile::kTiny: return 0.375;
    case Profile::kNano: return 0.25;
  }
  return 0;
}

int ModelConfig::head_hidden() const { return static_cast<int>(256 * width()); }

std::vector<int> ModelConfig::strides() const {
  std::vector<int> s{32, 16, 8, 4};
  s.resize(heads);
  return s;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("model config: " + m); };
  if (heads != 3 && heads != 4) fail("heads must be 3 or 4");
  if (input_size <= 0 || input_size % 64) {
    fail("input_size " + std::to_string(input_size) + " must be a positive multiple of 64");
  }
  if (num_classes < 1) fail("num_classes must be positive");
  if (pixsf_r < 2) fail("pixsf_r must be >= 2");
  if (is_pixsf(head) && (input_size / 32) % pixsf_r) {
    fail("stride-32 grid not divisible by pixsf_r");
  }
  if (unified_channels < 0) fail("unified_channels must be >= 0");
  if (attention && head_hidden() < 16) fail("attention needs a head width >= 16");
  if (distill.warmup_epochs < 0) fail("distill.warmup_epochs must be >= 0");
  if (distill.lambda < 0) fail("distill.lambda must be >= 0");
  if (distill.enabled && distill.aux_width <= 0) fail("distill.aux_width must be positive");
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw std::invalid_argument("config: '" + key + "' expects a boolean, got '" + v + "'");
}

std::map<std::string, std::string> config_fields(const ModelConfig& c) {
  return {
      {"attention", c.attention ? "1" : "0"},
      {"distill.aux_width", fmt_double(c.distill.aux_width)},
      {"distill.enabled", c.distill.enabled ? "1" : "0"},
      {"distill.lambda", fmt_double(c.distill.lambda)},
      {"distill.warmup_epochs", std::to_string(c.distill.warmup_epochs)},
      {"head", to_string(c.head)},
      {"heads", std::to_string(c.heads)},
      {"input_size", std::to_string(c.input_size)},
      {"neck", to_string(c.neck)},
      {"num_classes", std::to_string(c.num_classes)},
      {"pixsf_r", std::to_string(c.pixsf_r)},
      {"profile", to_string(c.profile)},
      {"unified_channels", std::to_string(c.unified_channels)},
  };
}

uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string ModelConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : config_fields(*this)) out += k + "=" + v + "\n";
  return out;
}

void ModelConfig::set(const std::string& key, const std::string& v) {
  if (key == "profile") profile = parse_profile(v);
  else if (key == "input_size") input_size = parse_int(key, v);
  else if (key == "neck") neck = parse_neck_mode(v);
  else if (key == "head") head = parse_head_mode(v);
  else if (key == "heads") heads = parse_int(key, v);
  else if (key == "attention") attention = parse_bool(key, v);
  else if (key == "num_classes") num_classes = parse_int(key, v);
  else if (key == "unified_channels") unified_channels = parse_int(key, v);
  else if (key == "pixsf_r") pixsf_r = parse_int(key, v);
  else if (key == "distill.enabled") distill.enabled = parse_bool(key, v);
  else if (key == "distill.warmup_epochs") distill.warmup_epochs = parse_int(key, v);
  else if (key == "distill.lambda") distill.lambda = parse_double(key, v);
  else if (key == "distill.aux_width") distill.aux_width = parse_double(key, v);
  else throw std::invalid_argument("model config: unknown key '" + key + "'");
}

ModelConfig ModelConfig::from_text(const std::string& text) {
  ModelConfig c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("model config: bad line '" + line + "'");
    c.set(line.substr(0, eq), line.substr(eq + 1));
  }
  c.validate();
  return c;
}

uint64_t ModelConfig::digest() const {
  std::string arch;
  for (const auto& [k, v] : config_fields(*this)) {
    if (k.rfind("distill.", 0) != 0) arch += k + "=" + v + "\n";
  }
  return fnv1a(arch.data(), arch.size());
}

ModelConfig ModelConfig::preset(const std::string& name) {
  ModelConfig c;
  std::string rest = name;
  bool p4 = false;
  if (rest.size() > 3 && rest.substr(rest.size() - 3) == "-p4") {
    p4 = true;
    rest.resize(rest.size() - 3);
  }
  const auto dash = rest.find('-');
  if (dash == std::string::npos) throw std::invalid_argument("unknown preset '" + name + "'");
  const std::string family = rest.substr(0, dash);
  c.profile = parse_profile(rest.substr(dash + 1));
  c.input_size = c.profile == Profile::kS ? 640 : 448;
  if (family == "yolox") {
    c.neck = NeckMode::kPAFPN;
    c.head = c.profile == Profile::kNano ? HeadMode::kDS : HeadMode::kPlain;
    c.heads = p4 ? 4 : 3;
    c.attention = false;
  } else if (family == "fasterx" && !p4) {
    c.neck = NeckMode::kSlimFPN;
    c.head = HeadMode::kDSPixSF;
    c.heads = 4;
    c.attention = true;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return c;
}

std::vector<std::string> ModelConfig::preset_names() {
  std::vector<std::string> out;
  for (const char* p : {"s", "tiny", "nano"}) {
    out.push_back(std::string("yolox-") + p);
    out.push_back(std::string("yolox-") + p + "-p4");
    out.push_back(std::string("fasterx-") + p);
  }
  return out;
}

// --- Detector -----------------------------------------------------------------

Detector::Detector(ModelConfig cfg, uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(seed);
  backbone_ = register_module(
      "backbone", std::make_shared<CSPDarknet>(cfg_.depth(), cfg_.width(), cfg_.depthwise(), rng));
  std::vector<int> ch = backbone_->channels();
  ch.resize(cfg_.heads);
  if (cfg_.neck == NeckMode::kPAFPN) {
    neck_ = register_module("neck", std::make_shared<PAFPN>(ch, cfg_.depth(), cfg_.depthwise(), rng));
  } else {
    const int unified = cfg_.unified_channels > 0 ? cfg_.unified_channels : ch[2];
    neck_ = register_module(
        "neck", std::make_shared<SlimFPN>(ch, unified, cfg_.depth(), cfg_.depthwise(), rng));
  }
  const HeadConfig hc{.mode = cfg_.head,
                      .attention = cfg_.attention,
                      .hidden = cfg_.head_hidden(),
                      .r = cfg_.pixsf_r,
                      .num_classes = cfg_.num_classes};
  const auto neck_ch = neck_->out_channels();
  for (int i = 0; i < cfg_.heads; ++i) {
    heads_.push_back(register_module("head." + std::to_string(i), make_head(neck_ch[i], hc, rng)));
  }
  if (cfg_.distill.enabled) {
    HeadConfig ac = hc;
    ac.mode = HeadMode::kPlain;
    ac.attention = false;
    ac.hidden = static_cast<int>(std::lround(256 * cfg_.distill.aux_width));
    for (int i = 0; i < cfg_.heads; ++i) {
      aux_heads_.push_back(
          register_module("aux_head." + std::to_string(i), make_head(neck_ch[i], ac, rng)));
    }
    // Student feature -> aux feature shape: 1x1 conv to r*r*C_aux then
    // pixel_shuffle for PixSF students, a plain 1x1 conv otherwise.
    for (int i = 0; i < cfg_.heads; ++i) {
      const int r = heads_[i]->feature_stride();
      align_.push_back(register_module(
          "align." + std::to_string(i),
          std::make_shared<ConvBlock>(ConvSpec{.in = heads_[i]->feature_channels(),
                                               .out = r * r * aux_heads_[i]->feature_channels(),
                                               .bias = true,
                                               .norm = false,
                                               .act = Activation::kIdentity},
                                      rng)));
    }
  }
  set_path("");
}

bool Detector::is_training_only(const std::string& path) {
  return path.rfind("aux_head.", 0) == 0 || path.rfind("align.", 0) == 0;
}

std::vector<Tensor> Detector::features(const Tensor& images) {
  if (images.rank() != 4 || images.dim(1) != 3 || images.dim(2) != cfg_.input_size ||
      images.dim(3) != cfg_.input_size) {
    throw std::invalid_argument("Detector: expected [N,3," + std::to_string(cfg_.input_size) + "," +
                                std::to_string(cfg_.input_size) + "] images, got " +
                                shape_str(images.shape()));
  }
  auto pyr = backbone_->forward(images);
  pyr.resize(cfg_.heads);
  return neck_->forward(pyr);
}

std::vector<HeadOutput> Detector::forward(const Tensor& images) {
  auto feats = features(images);
  const auto strides = cfg_.strides();
  std::vector<HeadOutput> out;
  for (int i = 0; i < cfg_.heads; ++i) out.push_back(heads_[i]->forward(feats[i], strides[i]));
  return out;
}

DetectorOutput Detector::forward_train(const Tensor& images) {
  auto feats = features(images);
  const auto strides = cfg_.strides();
  DetectorOutput out;
  for (int i = 0; i < cfg_.heads; ++i) {
    out.student.push_back(heads_[i]->forward(feats[i], strides[i]));
  }
  for (size_t i = 0; i < aux_heads_.size(); ++i) {
    out.aux.push_back(aux_heads_[i]->forward(feats[i], strides[i]));
    Tensor a = align_[i]->forward(out.student[i].feature);
    const int r = heads_[i]->feature_stride();
    out.aligned.push_back(r > 1 ? ops::pixel_shuffle(a, r) : a);
  }
  return out;
}

void copy_state(const Module& src, Module& dst) {
  for (bool buffers : {false, true}) {
    std::map<std::string, Tensor> from;
    for (auto& [n, t] : buffers ? src.named_buffers() : src.named_parameters()) from[n] = t;
    for (auto& [n, t] : buffers ? dst.named_buffers() : dst.named_parameters()) {
      auto it = from.find(n);
      if (it == from.end()) throw std::invalid_argument("copy_state: source lacks '" + n + "'");
      if (it->second.shape() != t.shape()) {
        throw std::invalid_argument("copy_state: shape mismatch for '" + n + "'");
      }
      std::copy(it->second.data().begin(), it->second.data().end(), t.data().begin());
    }
  }
}

std::unique_ptr<Detector> strip_aux(const Detector& model) {
  ModelConfig cfg = model.config();
  cfg.distill.enabled = false;
  auto out = std::make_unique<Detector>(cfg);
  copy_state(model, *out);
  out->train(model.training());
  return out;
}

// --- post-processing ------------------------------------------------------------

std::vector<int> nms(const std::vector<Detection>& dets, double iou_threshold) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dets[a].score > dets[b].score; });
  std::vector<int> keep;
  std::vector<char> removed(dets.size(), 0);
  for (size_t a = 0; a < order.size(); ++a) {
    const int i = order[a];
    if (removed[i]) continue;
    keep.push_back(i);
    for (size_t b = a + 1; b < order.size(); ++b) {
      const int j = order[b];
      if (!removed[j] && dets[j].cls == dets[i].cls &&
          iou(dets[i].box, dets[j].box) > iou_threshold) {
        removed[j] = 1;
      }
    }
  }
  return keep;
}

namespace {
double sigmoid(double v) { return v >= 0 ? 1 / (1 + std::exp(-v)) : std::exp(v) / (1 + std::exp(v)); }
}  // namespace

std::vector<Detection> postprocess(const std::vector<HeadOutput>& outputs, int index,
                                   double score_thr, double nms_thr, int max_dets) {
  std::vector<Detection> cands;
  for (const auto& lvl : outputs) {
    const int nc = lvl.cls.dim(1);
    const int64_t cells = lvl.grid.cells();
    const double s = lvl.grid.stride;
    const double* cls = lvl.cls.data().data() + static_cast<int64_t>(index) * nc * cells;
    const double* reg = lvl.reg.data().data() + static_cast<int64_t>(index) * 4 * cells;
    const double* obj = lvl.obj.data().data() + static_cast<int64_t>(index) * cells;
    for (int64_t c = 0; c < cells; ++c) {
      int best = 0;
      for (int k = 1; k < nc; ++k) {
        if (cls[k * cells + c] > cls[best * cells + c]) best = k;
      }
      const double score = sigmoid(obj[c]) * sigmoid(cls[best * cells + c]);
      if (score < score_thr) continue;
      const int i = static_cast<int>(c / lvl.grid.w), j = static_cast<int>(c % lvl.grid.w);
      const CenterBox b{(reg[c] + j) * s, (reg[cells + c] + i) * s,
                        std::exp(std::min(reg[2 * cells + c], 20.0)) * s,
                        std::exp(std::min(reg[3 * cells + c], 20.0)) * s};
      cands.push_back({to_corners(b), best, score});
    }
  }
  std::vector<Detection> out;
  for (int k : nms(cands, nms_thr)) {
    if (static_cast<int>(out.size()) >= max_dets) break;
    out.push_back(cands[k]);
  }
  return out;
}

std::vector<std::vector<Detection>> predict(Detector& model, const Tensor& images,
                                            double score_thr, double nms_thr) {
  const bool was_training = model.training();
  model.train(false);
  std::vector<std::vector<Detection>> out;
  {
    NoGradGuard ng;
    auto outputs = model.forward(images);
    for (int b = 0; b < images.dim(0); ++b) {
      out.push_back(postprocess(outputs, b, score_thr, nms_thr));
    }
  }
  model.train(was_training);
  return out;
}

// --- checkpoints -------------------------------------------------------------------

namespace {

constexpr const char* kMagic = "FASTERX-CHECKPOINT";
constexpr int kVersion = 1;

struct Entry {
  std::string name;
  char kind;  // 'p' parameter, 'b' buffer, 's' train state
  Shape shape;
};

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_le(std::ostream& os, const std::vector<double>& values) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  for (double v : values) {
    uint64_t bits = std::bit_cast<uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
  }
}

[[noreturn]] void corrupt(const std::string& path, const std::string& why) {
  throw std::runtime_error("checkpoint " + path + ": " + why);
}

struct Parsed {
  ModelConfig cfg;
  uint64_t digest = 0;
  int epoch = -1;
  std::vector<Entry> entries;
  std::vector<std::vector<double>> values;
};

Parsed read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  Parsed p;
  std::string line, word;
  if (!std::getline(in, line)) corrupt(path, "empty file");
  {
    std::istringstream ls(line);
    int version = 0;
    ls >> word >> version;
    if (word != kMagic) corrupt(path, "not a checkpoint");
    if (version != kVersion) {
      corrupt(path, "format version " + std::to_string(version) + " (expected " +
                        std::to_string(kVersion) + ")");
    }
  }
  auto expect = [&](const std::string& key) {
    if (!std::getline(in, line)) corrupt(path, "truncated header");
    std::istringstream ls(line);
    ls >> word;
    if (word != key) corrupt(path, "expected '" + key + "' in header, got '" + word + "'");
    std::string rest;
    std::getline(ls >> std::ws, rest);
    return rest;
  };
  p.digest = std::stoull(expect("digest"), nullptr, 16);
  p.epoch = std::stoi(expect("epoch"));
  const int cfg_lines = std::stoi(expect("config"));
  std::string cfg_text;
  for (int i = 0; i < cfg_lines; ++i) {
    if (!std::getline(in, line)) corrupt(path, "truncated config");
    cfg_text += line + "\n";
  }
  p.cfg = ModelConfig::from_text(cfg_text);
  if (p.cfg.digest() != p.digest) corrupt(path, "config digest mismatch");
  const int count = std::stoi(expect("tensors"));
  int64_t total = 0;
  for (int i = 0; i < count; ++i) {
    if (!std::getline(in, line)) corrupt(path, "truncated tensor table");
    std::istringstream ls(line);
    Entry e;
    int rank = 0;
    if (!(ls >> e.name >> e.kind >> rank)) corrupt(path, "bad tensor entry '" + line + "'");
    e.shape.resize(rank);
    for (auto& d : e.shape) {
      if (!(ls >> d)) corrupt(path, "bad tensor entry '" + line + "'");
    }
    total += shape_numel(e.shape);
    p.entries.push_back(std::move(e));
  }
  const uint64_t checksum = std::stoull(expect("checksum"), nullptr, 16);
  if (expect("data") != "") corrupt(path, "malformed data marker");
  std::vector<unsigned char> raw(static_cast<size_t>(total) * 8);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) corrupt(path, "truncated payload");
  if (in.peek() != std::char_traits<char>::eof()) corrupt(path, "trailing bytes after payload");
  if (fnv1a(raw.data(), raw.size()) != checksum) corrupt(path, "payload checksum mismatch");
  size_t off = 0;
  for (const auto& e : p.entries) {
    std::vector<double> v(static_cast<size_t>(shape_numel(e.shape)));
    for (auto& x : v) {
      uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(raw[off + i]) << (8 * i);
      x = std::bit_cast<double>(bits);
      off += 8;
    }
    p.values.push_back(std::move(v));
  }
  return p;
}

void apply(const Parsed& p, Detector& model, TrainState* state, const std::string& path) {
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < p.entries.size(); ++i) index[p.entries[i].name] = i;
  for (bool buffers : {false, true}) {
    for (auto& [n, t] : buffers ? model.named_buffers() : model.named_parameters()) {
      auto it = index.find(n);
      if (it == index.end()) corrupt(path, "missing tensor '" + n + "'");
      if (p.entries[it->second].shape != t.shape()) {
        corrupt(path, "shape mismatch for '" + n + "'");
      }
      const auto& v = p.values[it->second];
      std::copy(v.begin(), v.end(), t.data().begin());
    }
  }
  if (state) {
    state->epoch = p.epoch;
    state->tensors.clear();
    for (size_t i = 0; i < p.entries.size(); ++i) {
      if (p.entries[i].kind != 's') continue;
      state->tensors.emplace_back(p.entries[i].name,
                                  Tensor::from_vector(p.entries[i].shape, p.values[i]));
    }
  }
}

}  // namespace

void save_checkpoint(const Detector& model, const std::string& path, const TrainState* state) {
  std::vector<Entry> entries;
  std::vector<const Tensor*> tensors;
  const auto params = model.named_parameters();
  const auto buffers = model.named_buffers();
  for (const auto& [n, t] : params) entries.push_back({n, 'p', t.shape()}), tensors.push_back(&t);
  for (const auto& [n, t] : buffers) entries.push_back({n, 'b', t.shape()}), tensors.push_back(&t);
  if (state) {
    for (const auto& [n, t] : state->tensors) {
      entries.push_back({n, 's', t.shape()});
      tensors.push_back(&t);
    }
  }
  std::ostringstream payload;
  for (const Tensor* t : tensors) {
    write_le(payload, std::vector<double>(t->data().begin(), t->data().end()));
  }
  const std::string data = payload.str();

  const std::string cfg_text = model.config().to_text();
  std::ostringstream head;
  head << kMagic << ' ' << kVersion << '\n';
  head << "digest " << hex64(model.config().digest()) << '\n';
  head << "epoch " << (state ? state->epoch : -1) << '\n';
  head << "config " << std::count(cfg_text.begin(), cfg_text.end(), '\n') << '\n' << cfg_text;
  head << "tensors " << entries.size() << '\n';
  for (const auto& e : entries) {
    head << e.name << ' ' << e.kind << ' ' << e.shape.size();
    for (int d : e.shape) head << ' ' << d;
    head << '\n';
  }
  head << "checksum " << hex64(fnv1a(data.data(), data.size())) << '\n';
  head << "data\n";

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path);
    out << head.str();
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("failed writing checkpoint " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot move checkpoint into place at " + path);
  }
}

std::unique_ptr<Detector> load_checkpoint(const std::string& path, TrainState* state) {
  Parsed p = read_file(path);
  auto model = std::make_unique<Detector>(p.cfg);
  apply(p, *model, state, path);
  return model;
}

void load_checkpoint_into(Detector& model, const std::string& path, TrainState* state) {
  Parsed p = read_file(path);
  if (p.digest != model.config().digest()) {
    throw std::invalid_argument("checkpoint " + path + " was saved for a different architecture (" +
                                to_string(p.cfg.profile) + "/" + to_string(p.cfg.neck) + "/" +
                                to_string(p.cfg.head) + ") than the target (" +
                                to_string(model.config().profile) + "/" +
                                to_string(model.config().neck) + "/" +
                                to_string(model.config().head) + ")");
  }
  apply(p, model, state, path);
}

}  // namespace fasterx
