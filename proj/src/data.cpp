/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace fasterx {

namespace fs = std::filesystem;

// --- annotations -----------------------------------------------------------------

ParseResult parse_annotations(std::istream& in, const std::string& source) {
  ParseResult res;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<int> f;
    size_t pos = 0;
    while (pos <= line.size()) {
      size_t end = line.find(',', pos);
      if (end == std::string::npos) end = line.size();
      std::string tok = line.substr(pos, end - pos);
      const auto b = tok.find_first_not_of(" \t"), e = tok.find_last_not_of(" \t");
      tok = b == std::string::npos ? "" : tok.substr(b, e - b + 1);
      int v = 0;
      auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || r.ec != std::errc() || r.ptr != tok.data() + tok.size()) {
        // Trailing comma is tolerated (some VisDrone files have one).
        if (tok.empty() && end == line.size() && f.size() >= 8) break;
        throw std::runtime_error(source + ":" + std::to_string(lineno) + ": field " +
                                 std::to_string(f.size() + 1) + " is not an integer: '" + tok + "'");
      }
      f.push_back(v);
      pos = end + 1;
    }
    if (f.size() < 8) {
      throw std::runtime_error(source + ":" + std::to_string(lineno) + ": expected 8 fields, got " +
                               std::to_string(f.size()));
    }
    AnnotationRecord r{f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7]};
    if (r.width <= 0 || r.height <= 0) {
      ++res.dropped_zero_area;
    } else if (r.category < 0 || r.category > kMaxCategory) {
      ++res.dropped_out_of_range;
    } else {
      res.records.push_back(r);
    }
  }
  return res;
}

ParseResult parse_annotation_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open annotation file " + path);
  return parse_annotations(in, path);
}

void write_annotations(std::ostream& out, const std::vector<AnnotationRecord>& records) {
  for (const auto& r : records) {
    out << r.bbox_left << ',' << r.bbox_top << ',' << r.width << ',' << r.height << ',' << r.score
        << ',' << r.category << ',' << r.truncation << ',' << r.occlusion << '\n';
  }
}

void write_annotation_file(const std::string& path, const std::vector<AnnotationRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write annotation file " + path);
  write_annotations(out, records);
}

std::vector<GroundTruth> to_ground_truth(const std::vector<AnnotationRecord>& records,
                                         int num_classes) {
  std::vector<GroundTruth> out;
  for (const auto& r : records) {
    if (r.category == 0 || r.score == 0 || r.category > num_classes) continue;
    out.push_back({r.box(), r.category - 1});
  }
  return out;
}

AnnotationRecord to_record(const GroundTruth& gt) {
  AnnotationRecord r;
  r.bbox_left = static_cast<int>(std::lround(gt.box.x1));
  r.bbox_top = static_cast<int>(std::lround(gt.box.y1));
  r.width = static_cast<int>(std::lround(gt.box.x2)) - r.bbox_left;
  r.height = static_cast<int>(std::lround(gt.box.y2)) - r.bbox_top;
  r.category = gt.cls + 1;
  return r;
}

// --- manifests ---------------------------------------------------------------------

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path);
  const fs::path base = fs::path(path).parent_path();
  std::vector<ManifestEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    ManifestEntry e;
    if (!(ss >> e.image >> e.annotation)) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'image_path annotation_path'");
    }
    if (fs::path(e.image).is_relative()) e.image = (base / e.image).string();
    if (fs::path(e.annotation).is_relative()) e.annotation = (base / e.annotation).string();
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path);
  for (const auto& e : entries) out << e.image << ' ' << e.annotation << '\n';
}

std::vector<Sample> load_dataset(const std::string& manifest, int num_classes) {
  std::vector<Sample> out;
  for (const auto& e : read_manifest(manifest)) {
    Sample s;
    s.image = cv::imread(e.image, cv::IMREAD_COLOR);
    if (s.image.empty()) throw std::runtime_error("cannot read image " + e.image);
    s.targets = to_ground_truth(parse_annotation_file(e.annotation).records, num_classes);
    out.push_back(std::move(s));
  }
  return out;
}

// --- synthetic data ------------------------------------------------------------------

namespace {

uint64_t splitmix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct ClassStyle {
  cv::Vec3b color;  // BGR
  int shape;
};

const ClassStyle kStyles[] = {
    {{40, 40, 230}, 0},  {{40, 200, 40}, 1},  {{230, 60, 40}, 2},   {{30, 220, 230}, 3},
    {{220, 50, 220}, 4}, {{220, 220, 40}, 0}, {{20, 130, 250}, 1},  {{245, 245, 245}, 2},
    {{25, 25, 25}, 3},   {{140, 20, 110}, 4}, {{120, 200, 160}, 0}, {{60, 100, 160}, 1},
};

cv::Vec3b jitter(cv::Vec3b c, int d) {
  cv::Vec3b out;
  for (int k = 0; k < 3; ++k) out[k] = cv::saturate_cast<uchar>(c[k] + d);
  return out;
}

// Fills pixels of [x, x+w) x [y, y+h) according to the class shape.
void draw_object(cv::Mat& img, int x, int y, int w, int h, const ClassStyle& st, int shade) {
  const cv::Vec3b c = jitter(st.color, shade);
  const cv::Vec3b inner = jitter(st.color, shade - 90);
  const double cx = x + 0.5 * w, cy = y + 0.5 * h;
  for (int i = y; i < y + h; ++i) {
    for (int j = x; j < x + w; ++j) {
      const double u = (j + 0.5 - cx) / (0.5 * w), v = (i + 0.5 - cy) / (0.5 * h);
      bool on = true;
      bool dark = false;
      switch (st.shape) {
        case 1:  // ellipse, but keep the bounding rows/cols so the box stays tight
          on = u * u + v * v <= 1.0 || std::abs(u) < 0.35 || std::abs(v) < 0.35;
          break;
        case 2:  // frame with a dark core
          dark = std::abs(u) < 0.5 && std::abs(v) < 0.5;
          break;
        case 3:  // plus
          on = std::abs(u) < 0.4 || std::abs(v) < 0.4;
          break;
        case 4:  // diagonal stripes
          dark = (static_cast<int>(std::floor((j - x + i - y) / 2.0)) & 1) != 0;
          break;
        default:
          break;
      }
      if (on) img.at<cv::Vec3b>(i, j) = dark ? inner : c;
    }
  }
}

}  // namespace

Sample synth_sample(const SynthSpec& spec, int index) {
  if (spec.image_size < 32 || spec.num_classes < 1 ||
      spec.num_classes > static_cast<int>(std::size(kStyles)) || spec.max_aspect < 1.0 ||
      spec.min_objects < 0 || spec.max_objects < spec.min_objects) {
    throw std::invalid_argument("synth: invalid spec");
  }
  Rng rng(splitmix(spec.seed * 0x100000001b3ULL + static_cast<uint64_t>(index)));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int S = spec.image_size;

  // Background: tilted gray gradient, per-pixel noise, a few dull blobs.
  Sample s;
  s.image = cv::Mat(S, S, CV_8UC3);
  const double base = 70 + 100 * u01(rng);
  const double gx = (u01(rng) - 0.5) * 60 / S, gy = (u01(rng) - 0.5) * 60 / S;
  const double tint[3] = {(u01(rng) - 0.5) * 20, (u01(rng) - 0.5) * 20, (u01(rng) - 0.5) * 20};
  std::normal_distribution<double> noise(0.0, 8.0);
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < S; ++j) {
      const double g = base + gx * (j - S / 2) + gy * (i - S / 2);
      auto& px = s.image.at<cv::Vec3b>(i, j);
      for (int k = 0; k < 3; ++k) px[k] = cv::saturate_cast<uchar>(g + tint[k] + noise(rng));
    }
  }
  const int blobs = static_cast<int>(u01(rng) * 4);
  for (int b = 0; b < blobs; ++b) {
    const cv::Point c(static_cast<int>(u01(rng) * S), static_cast<int>(u01(rng) * S));
    const cv::Size ax(4 + static_cast<int>(u01(rng) * S / 6), 4 + static_cast<int>(u01(rng) * S / 6));
    const double g = base + (u01(rng) - 0.5) * 50;
    cv::ellipse(s.image, c, ax, u01(rng) * 180, 0, 360, cv::Scalar(g, g, g), cv::FILLED);
  }

  std::uniform_int_distribution<int> count(spec.min_objects, spec.max_objects);
  const int n = count(rng);
  const double max_area = static_cast<double>(S - 2) * (S - 2);
  for (int o = 0; o < n; ++o) {
    const int cls = std::uniform_int_distribution<int>(0, spec.num_classes - 1)(rng);
    for (int attempt = 0; attempt < 50; ++attempt) {
      // Size bucket first, then a log-uniform area inside it.
      const double r = u01(rng);
      double lo = 1024, hi = 9216;
      SizeBucket want = SizeBucket::kMedium;
      if (r < spec.small_fraction) {
        lo = 64, hi = 1023, want = SizeBucket::kSmall;
      } else if (r < spec.small_fraction + spec.large_fraction && max_area > 9217 * 1.2) {
        lo = 9217, hi = std::min(max_area * 0.8, 4.0 * 9216), want = SizeBucket::kLarge;
      }
      hi = std::min(hi, max_area);
      if (lo > hi) continue;
      const double area = std::exp(std::log(lo) + u01(rng) * (std::log(hi) - std::log(lo)));
      // Mostly near-square, with a tail up to max_aspect.
      const double amax = std::min(spec.max_aspect, 2.0);
      const double aspect = u01(rng) < 0.6 ? 1.0 + u01(rng) * (amax - 1.0)
                                           : amax + u01(rng) * (spec.max_aspect - amax);
      int w = static_cast<int>(std::lround(std::sqrt(area * aspect)));
      int h = static_cast<int>(std::lround(std::sqrt(area / aspect)));
      if (u01(rng) < 0.5) std::swap(w, h);
      if (w < 2 || h < 2 || w > S - 2 || h > S - 2) continue;
      if (std::max(w, h) > spec.max_aspect * std::min(w, h)) continue;
      if (size_bucket(static_cast<double>(w) * h) != want) continue;
      const int x = std::uniform_int_distribution<int>(0, S - w)(rng);
      const int y = std::uniform_int_distribution<int>(0, S - h)(rng);
      const Box b{static_cast<double>(x), static_cast<double>(y), static_cast<double>(x + w),
                  static_cast<double>(y + h)};
      bool clash = false;
      for (const auto& t : s.targets) {
        const double iw = std::max(0.0, std::min(b.x2, t.box.x2) - std::max(b.x1, t.box.x1));
        const double ih = std::max(0.0, std::min(b.y2, t.box.y2) - std::max(b.y1, t.box.y1));
        const double inter = iw * ih;
        if (inter > 0.15 * std::min(b.area(), t.box.area())) clash = true;
      }
      if (clash) continue;
      const int shade = static_cast<int>((u01(rng) - 0.5) * 40);
      draw_object(s.image, x, y, w, h, kStyles[cls], shade);
      s.targets.push_back({b, cls});
      break;
    }
  }
  return s;
}

std::vector<Sample> synth_dataset(const SynthSpec& spec) {
  std::vector<Sample> out;
  out.reserve(spec.num_images);
  for (int i = 0; i < spec.num_images; ++i) out.push_back(synth_sample(spec, i));
  return out;
}

std::vector<ManifestEntry> write_dataset(const std::vector<Sample>& samples, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "images");
  fs::create_directories(fs::path(dir) / "annotations");
  std::vector<ManifestEntry> entries;
  for (size_t i = 0; i < samples.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%05zu", i);
    ManifestEntry e{std::string("images/") + name + ".png",
                    std::string("annotations/") + name + ".txt"};
    if (!cv::imwrite((fs::path(dir) / e.image).string(), samples[i].image)) {
      throw std::runtime_error("cannot write image under " + dir);
    }
    std::vector<AnnotationRecord> recs;
    for (const auto& t : samples[i].targets) recs.push_back(to_record(t));
    write_annotation_file((fs::path(dir) / e.annotation).string(), recs);
    entries.push_back(e);
  }
  write_manifest((fs::path(dir) / "manifest.txt").string(), entries);
  return entries;
}

// --- buckets, mosaic, letterbox ------------------------------------------------------------

SizeBucket size_bucket(double area) {
  if (area < 32.0 * 32.0) return SizeBucket::kSmall;
  if (area <= 96.0 * 96.0) return SizeBucket::kMedium;
  return SizeBucket::kLarge;
}

std::string to_string(SizeBucket b) {
  switch (b) {
    case SizeBucket::kSmall: return "small";
    case SizeBucket::kMedium: return "medium";
    case SizeBucket::kLarge: return "large";
  }
  return "?";
}

MosaicResult mosaic(const Sample* samples[4], int out_size, Rng& rng, double scale_min,
                    double scale_max) {
  if (out_size < 8) throw std::invalid_argument("mosaic: output too small");
  if (scale_min <= 0 || scale_max < scale_min) throw std::invalid_argument("mosaic: bad scale range");
  MosaicResult res;
  const int S = out_size;
  std::uniform_int_distribution<int> cdist(S / 4, 3 * S / 4);
  const int xc = cdist(rng), yc = cdist(rng);
  res.center_x = xc;
  res.center_y = yc;
  res.sample.image = cv::Mat(S, S, CV_8UC3, cv::Scalar(kPadValue, kPadValue, kPadValue));
  std::uniform_real_distribution<double> sdist(scale_min, scale_max);

  for (int q = 0; q < 4; ++q) {
    const Sample& src = *samples[q];
    if (src.image.empty()) throw std::invalid_argument("mosaic: empty input image");
    const double s = scale_min == scale_max ? scale_min : sdist(rng);
    const int w = std::max(1, static_cast<int>(std::lround(src.image.cols * s)));
    const int h = std::max(1, static_cast<int>(std::lround(src.image.rows * s)));
    cv::Mat img = src.image;
    if (w != src.image.cols || h != src.image.rows) cv::resize(src.image, img, cv::Size(w, h));
    const bool right = q == 1 || q == 3, bottom = q >= 2;
    MosaicTile& t = res.tiles[q];
    t.scale_x = static_cast<double>(w) / src.image.cols;
    t.scale_y = static_cast<double>(h) / src.image.rows;
    const int ox = right ? xc : xc - w, oy = bottom ? yc : yc - h;
    t.offset_x = ox;
    t.offset_y = oy;
    t.quadrant = {right ? static_cast<double>(xc) : 0.0, bottom ? static_cast<double>(yc) : 0.0,
                  right ? static_cast<double>(S) : static_cast<double>(xc),
                  bottom ? static_cast<double>(S) : static_cast<double>(yc)};
    // Paste the part of the resized image that falls inside the quadrant.
    const cv::Rect quad(static_cast<int>(t.quadrant.x1), static_cast<int>(t.quadrant.y1),
                        static_cast<int>(t.quadrant.width()), static_cast<int>(t.quadrant.height()));
    const cv::Rect placed = cv::Rect(ox, oy, w, h) & quad;
    if (placed.area() > 0) {
      img(cv::Rect(placed.x - ox, placed.y - oy, placed.width, placed.height))
          .copyTo(res.sample.image(placed));
    }
    for (const auto& g : src.targets) {
      Box b{g.box.x1 * t.scale_x + ox, g.box.y1 * t.scale_y + oy, g.box.x2 * t.scale_x + ox,
            g.box.y2 * t.scale_y + oy};
      b.x1 = std::clamp(b.x1, t.quadrant.x1, t.quadrant.x2);
      b.x2 = std::clamp(b.x2, t.quadrant.x1, t.quadrant.x2);
      b.y1 = std::clamp(b.y1, t.quadrant.y1, t.quadrant.y2);
      b.y2 = std::clamp(b.y2, t.quadrant.y1, t.quadrant.y2);
      if (b.width() < 2.0 || b.height() < 2.0) continue;
      res.sample.targets.push_back({b, g.cls});
    }
  }
  return res;
}

cv::Mat letterbox(const cv::Mat& image, int target, LetterboxInfo& info) {
  if (image.empty() || target <= 0) throw std::invalid_argument("letterbox: empty input");
  info.src_w = image.cols;
  info.src_h = image.rows;
  info.scale = std::min(static_cast<double>(target) / image.cols,
                        static_cast<double>(target) / image.rows);
  const int nw = std::min(target, static_cast<int>(std::lround(image.cols * info.scale)));
  const int nh = std::min(target, static_cast<int>(std::lround(image.rows * info.scale)));
  info.pad_left = (target - nw) / 2;
  info.pad_top = (target - nh) / 2;
  cv::Mat out(target, target, image.type(), cv::Scalar::all(kPadValue));
  cv::Mat resized;
  if (nw == image.cols && nh == image.rows) {
    resized = image;
  } else {
    cv::resize(image, resized, cv::Size(nw, nh), 0, 0,
               info.scale < 1.0 ? cv::INTER_AREA : cv::INTER_LINEAR);
  }
  resized.copyTo(out(cv::Rect(info.pad_left, info.pad_top, nw, nh)));
  return out;
}

Box letterbox_box(const Box& b, const LetterboxInfo& info) {
  return {b.x1 * info.scale + info.pad_left, b.y1 * info.scale + info.pad_top,
          b.x2 * info.scale + info.pad_left, b.y2 * info.scale + info.pad_top};
}

Box unletterbox_box(const Box& b, const LetterboxInfo& info) {
  auto fx = [&](double x) { return std::clamp((x - info.pad_left) / info.scale, 0.0, 1.0 * info.src_w); };
  auto fy = [&](double y) { return std::clamp((y - info.pad_top) / info.scale, 0.0, 1.0 * info.src_h); };
  return {fx(b.x1), fy(b.y1), fx(b.x2), fy(b.y2)};
}

Tensor to_tensor(const std::vector<cv::Mat>& images) {
  if (images.empty()) throw std::invalid_argument("to_tensor: no images");
  const int S = images[0].rows;
  const int n = static_cast<int>(images.size());
  Tensor t({n, 3, S, S});
  auto d = t.data();
  const int64_t plane = static_cast<int64_t>(S) * S;
  for (int b = 0; b < n; ++b) {
    const cv::Mat& im = images[b];
    if (im.rows != S || im.cols != S || im.type() != CV_8UC3) {
      throw std::invalid_argument("to_tensor: images must be " + std::to_string(S) + "x" +
                                  std::to_string(S) + " 8-bit BGR");
    }
    double* base = d.data() + static_cast<int64_t>(b) * 3 * plane;
    for (int i = 0; i < S; ++i) {
      const cv::Vec3b* row = im.ptr<cv::Vec3b>(i);
      for (int j = 0; j < S; ++j) {
        for (int c = 0; c < 3; ++c) base[c * plane + i * S + j] = row[j][2 - c] / 255.0;
      }
    }
  }
  return t;
}

}  // namespace fasterx
