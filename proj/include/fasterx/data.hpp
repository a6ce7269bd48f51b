/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "fasterx/assignment.hpp"
#include "fasterx/nn.hpp"

namespace fasterx {

// --- VisDrone annotations ------------------------------------------------------

// One line: bbox_left,bbox_top,width,height,score,category,truncation,occlusion
struct AnnotationRecord {
  int bbox_left = 0, bbox_top = 0, width = 0, height = 0;
  int score = 1;
  int category = 1;  // 0 = ignored region, 1..10 object classes, 11 = others
  int truncation = 0, occlusion = 0;

  Box box() const {
    return {static_cast<double>(bbox_left), static_cast<double>(bbox_top),
            static_cast<double>(bbox_left + width), static_cast<double>(bbox_top + height)};
  }
  bool operator==(const AnnotationRecord&) const = default;
};

inline constexpr int kMaxCategory = 11;

struct ParseResult {
  std::vector<AnnotationRecord> records;
  int dropped_zero_area = 0;
  int dropped_out_of_range = 0;  // category outside [0, kMaxCategory]
};

// Throws std::runtime_error naming the line for malformed input.
ParseResult parse_annotations(std::istream& in, const std::string& source = "<stream>");
ParseResult parse_annotation_file(const std::string& path);
void write_annotations(std::ostream& out, const std::vector<AnnotationRecord>& records);
void write_annotation_file(const std::string& path, const std::vector<AnnotationRecord>& records);

// Training/evaluation targets: drops ignored regions (category 0), score-0
// records and categories beyond num_classes; class = category - 1.
std::vector<GroundTruth> to_ground_truth(const std::vector<AnnotationRecord>& records,
                                         int num_classes);
AnnotationRecord to_record(const GroundTruth& gt);

// --- samples and datasets -----------------------------------------------------------

struct Sample {
  cv::Mat image;  // 8-bit BGR
  std::vector<GroundTruth> targets;
};

// Plain-text manifest: one "image_path annotation_path" pair per line.
// Relative paths resolve against the manifest's directory.
struct ManifestEntry {
  std::string image;
  std::string annotation;
};
std::vector<ManifestEntry> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<Sample> load_dataset(const std::string& manifest, int num_classes);

// --- synthetic small-object data ----------------------------------------------------

struct SynthSpec {
  int image_size = 128;
  int num_images = 500;
  int min_objects = 3;
  int max_objects = 8;
  double small_fraction = 0.7;   // share of boxes with area < 32^2
  double large_fraction = 0.03;  // share with area > 96^2 (when they fit)
  double max_aspect = 5.0;
  int num_classes = 10;
  uint64_t seed = 0;
};

// Colored shapes on textured backgrounds; each class has its own color and
// shape. Image i depends only on (seed, i).
Sample synth_sample(const SynthSpec& spec, int index);
std::vector<Sample> synth_dataset(const SynthSpec& spec);
// Writes images/NNNNN.png, annotations/NNNNN.txt and manifest.txt under dir.
std::vector<ManifestEntry> write_dataset(const std::vector<Sample>& samples, const std::string& dir);

// --- augmentation and preprocessing --------------------------------------------------

enum class SizeBucket { kSmall, kMedium, kLarge };
SizeBucket size_bucket(double area);
std::string to_string(SizeBucket b);

// Per-quadrant placement used by mosaic: dst = scale * src + offset (per
// axis), then the image and its boxes are clipped to the quadrant rectangle.
struct MosaicTile {
  double scale_x = 1.0, scale_y = 1.0;
  double offset_x = 0, offset_y = 0;
  Box quadrant;
};

struct MosaicResult {
  Sample sample;
  double center_x = 0, center_y = 0;
  MosaicTile tiles[4];  // top-left, top-right, bottom-left, bottom-right
};

// 2x2 collage around a random center in [out/4, 3*out/4]. Each input is
// resized by a factor drawn from [scale_min, scale_max] and anchored at the
// center on its quadrant's corner. Boxes narrower or shorter than 2 px after
// clipping are dropped.
MosaicResult mosaic(const Sample* samples[4], int out_size, Rng& rng, double scale_min = 1.0,
                    double scale_max = 1.0);

inline constexpr int kPadValue = 114;

struct LetterboxInfo {
  double scale = 1.0;
  int pad_left = 0, pad_top = 0;
  int src_w = 0, src_h = 0;
};

// Aspect-preserving resize into target x target, centered on gray padding.
cv::Mat letterbox(const cv::Mat& image, int target, LetterboxInfo& info);
Box letterbox_box(const Box& b, const LetterboxInfo& info);
// Maps a box from network input back to source pixels, clipped to the image.
Box unletterbox_box(const Box& b, const LetterboxInfo& info);

// [N, 3, S, S] tensor in RGB order scaled to [0, 1]; all images must be S x S.
Tensor to_tensor(const std::vector<cv::Mat>& images);

}  // namespace fasterx
