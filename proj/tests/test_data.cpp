/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <opencv2/imgcodecs.hpp>

#include "fasterx/data.hpp"

using namespace fasterx;

namespace {

Sample single_object(int size, Box b, int cls) {
  Sample s;
  s.image = cv::Mat(size, size, CV_8UC3, cv::Scalar(10, 20, 30));
  s.image(cv::Rect(static_cast<int>(b.x1), static_cast<int>(b.y1), static_cast<int>(b.width()),
                   static_cast<int>(b.height())))
      .setTo(cv::Scalar(200, 100, 50));
  s.targets.push_back({b, cls});
  return s;
}

}  // namespace

TEST(Annotations, ParsesFieldMapping) {
  std::istringstream in("10,20,30,40,1,4,0,0\n");
  const ParseResult r = parse_annotations(in);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].box(), (Box{10, 20, 40, 60}));
  EXPECT_EQ(r.records[0].category, 4);
}

TEST(Annotations, DropsZeroAreaAndOutOfRange) {
  std::istringstream in("1,1,0,5,1,1,0,0\n1,1,5,5,1,12,0,0\n1,1,5,5,1,3,0,0,\n\n2,2,3,3,0,0,0,0\n");
  const ParseResult r = parse_annotations(in);
  EXPECT_EQ(r.dropped_zero_area, 1);
  EXPECT_EQ(r.dropped_out_of_range, 1);
  ASSERT_EQ(r.records.size(), 2u);
  // Ignored regions and score-0 records survive parsing but not target conversion.
  EXPECT_EQ(to_ground_truth(r.records, 10).size(), 1u);
  EXPECT_EQ(to_ground_truth(r.records, 10)[0].cls, 2);
}

TEST(Annotations, MalformedLineNamesLine) {
  std::istringstream in("1,2,3,4,1,1,0,0\n1,2,x,4,1,1,0,0\n");
  try {
    parse_annotations(in, "f.txt");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("f.txt:2"), std::string::npos) << e.what();
  }
  std::istringstream short_line("1,2,3\n");
  EXPECT_THROW(parse_annotations(short_line), std::runtime_error);
}

TEST(Annotations, WriteParseRoundTripIsFieldIdentical) {
  const std::string fixture =
      "684,8,273,116,0,0,0,0\n406,119,265,70,0,0,0,0\n255,22,119,128,0,0,0,0\n"
      "1,67,10,14,1,1,0,1\n16,230,9,20,1,2,0,2\n100,100,33,33,1,9,1,0\n";
  std::istringstream in(fixture);
  const ParseResult r = parse_annotations(in);
  std::ostringstream out;
  write_annotations(out, r.records);
  EXPECT_EQ(out.str(), fixture);
  std::istringstream again(out.str());
  EXPECT_EQ(parse_annotations(again).records, r.records);
}

TEST(Synth, DeterministicAndIndexAddressable) {
  SynthSpec spec;
  spec.num_images = 4;
  spec.seed = 11;
  const auto a = synth_dataset(spec);
  const auto b = synth_dataset(spec);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(cv::norm(a[i].image, b[i].image, cv::NORM_INF), 0.0);
    ASSERT_EQ(a[i].targets.size(), b[i].targets.size());
    for (size_t k = 0; k < a[i].targets.size(); ++k) {
      EXPECT_EQ(a[i].targets[k].box, b[i].targets[k].box);
    }
  }
  const Sample third = synth_sample(spec, 2);
  EXPECT_EQ(cv::norm(third.image, a[2].image, cv::NORM_INF), 0.0);
  spec.seed = 12;
  EXPECT_GT(cv::norm(synth_sample(spec, 2).image, a[2].image, cv::NORM_INF), 0.0);
}

TEST(Synth, StatisticsMatchSpec) {
  SynthSpec spec;
  spec.num_images = 200;
  spec.seed = 3;
  int total = 0, small = 0;
  std::vector<int> per_class(spec.num_classes, 0);
  for (const auto& s : synth_dataset(spec)) {
    EXPECT_GE(static_cast<int>(s.targets.size()), 1);
    for (const auto& t : s.targets) {
      ++total;
      small += size_bucket(t.box.area()) == SizeBucket::kSmall;
      ++per_class[t.cls];
      const double w = t.box.width(), h = t.box.height();
      EXPECT_LE(std::max(w, h) / std::min(w, h), spec.max_aspect);
      EXPECT_GE(t.box.x1, 0);
      EXPECT_LE(t.box.x2, spec.image_size);
      EXPECT_GE(t.box.y1, 0);
      EXPECT_LE(t.box.y2, spec.image_size);
      // Generated boxes satisfy the record invariants after conversion.
      const AnnotationRecord r = to_record(t);
      EXPECT_GT(r.width, 0);
      EXPECT_GT(r.height, 0);
      EXPECT_EQ(r.box(), t.box);
    }
  }
  EXPECT_GE(static_cast<double>(small) / total, 0.6);
  for (int c : per_class) EXPECT_GT(c, 0);
}

TEST(Synth, WriteAndLoadDataset) {
  SynthSpec spec;
  spec.num_images = 3;
  spec.seed = 5;
  const auto samples = synth_dataset(spec);
  const auto dir = std::filesystem::temp_directory_path() / "fasterx_test_synth";
  std::filesystem::remove_all(dir);
  write_dataset(samples, dir.string());
  const auto back = load_dataset((dir / "manifest.txt").string(), spec.num_classes);
  ASSERT_EQ(back.size(), samples.size());
  for (size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(cv::norm(back[i].image, samples[i].image, cv::NORM_INF), 0.0);
    ASSERT_EQ(back[i].targets.size(), samples[i].targets.size());
    for (size_t k = 0; k < back[i].targets.size(); ++k) {
      EXPECT_EQ(back[i].targets[k].box, samples[i].targets[k].box);
      EXPECT_EQ(back[i].targets[k].cls, samples[i].targets[k].cls);
    }
  }
  std::filesystem::remove_all(dir);
}

TEST(SizeBuckets, Boundaries) {
  EXPECT_EQ(size_bucket(32 * 32 - 1), SizeBucket::kSmall);
  EXPECT_EQ(size_bucket(32 * 32), SizeBucket::kMedium);
  EXPECT_EQ(size_bucket(96 * 96), SizeBucket::kMedium);
  EXPECT_EQ(size_bucket(96 * 96 + 1), SizeBucket::kLarge);
}

TEST(Mosaic, IdenticalInputsLandInOwnQuadrant) {
  const Sample s = single_object(64, {24, 24, 40, 40}, 3);
  const Sample* four[4] = {&s, &s, &s, &s};
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const MosaicResult m = mosaic(four, 64, rng);
    EXPECT_LE(m.sample.targets.size(), 4u);
    EXPECT_GE(m.center_x, 16);
    EXPECT_LE(m.center_x, 48);
    for (const auto& t : m.sample.targets) {
      EXPECT_EQ(t.cls, 3);
      int inside = 0;
      for (const auto& tile : m.tiles) {
        const Box& q = tile.quadrant;
        inside += t.box.x1 >= q.x1 && t.box.x2 <= q.x2 && t.box.y1 >= q.y1 && t.box.y2 <= q.y2;
      }
      EXPECT_GE(inside, 1);
    }
  }
}

TEST(Mosaic, MatchesAffineOracle) {
  // Independent placement: each quadrant's source is anchored at the center on
  // the corner facing it; boxes map by translation then clip to the quadrant.
  Rng gen(9);
  SynthSpec spec;
  spec.image_size = 64;
  spec.seed = 21;
  for (int trial = 0; trial < 30; ++trial) {
    Sample in[4];
    for (int q = 0; q < 4; ++q) in[q] = synth_sample(spec, trial * 4 + q);
    const Sample* four[4] = {&in[0], &in[1], &in[2], &in[3]};
    const MosaicResult m = mosaic(four, 96, gen);
    const double xc = m.center_x, yc = m.center_y;
    std::vector<GroundTruth> expect;
    for (int q = 0; q < 4; ++q) {
      const bool right = q % 2 == 1, bottom = q / 2 == 1;
      const double ox = right ? xc : xc - 64, oy = bottom ? yc : yc - 64;
      const double qx1 = right ? xc : 0, qx2 = right ? 96 : xc;
      const double qy1 = bottom ? yc : 0, qy2 = bottom ? 96 : yc;
      for (const auto& g : in[q].targets) {
        const double x1 = std::min(std::max(g.box.x1 + ox, qx1), qx2);
        const double x2 = std::min(std::max(g.box.x2 + ox, qx1), qx2);
        const double y1 = std::min(std::max(g.box.y1 + oy, qy1), qy2);
        const double y2 = std::min(std::max(g.box.y2 + oy, qy1), qy2);
        if (x2 - x1 >= 2 && y2 - y1 >= 2) expect.push_back({{x1, y1, x2, y2}, g.cls});
      }
      // Pixel check at the quadrant's inner corner.
      const int px = right ? static_cast<int>(xc) : static_cast<int>(xc) - 1;
      const int py = bottom ? static_cast<int>(yc) : static_cast<int>(yc) - 1;
      EXPECT_EQ(m.sample.image.at<cv::Vec3b>(py, px),
                in[q].image.at<cv::Vec3b>(py - static_cast<int>(oy), px - static_cast<int>(ox)));
    }
    ASSERT_EQ(m.sample.targets.size(), expect.size());
    size_t total_in = 0;
    for (const auto& s : in) total_in += s.targets.size();
    EXPECT_LE(m.sample.targets.size(), total_in);
    for (size_t k = 0; k < expect.size(); ++k) {
      EXPECT_EQ(m.sample.targets[k].box, expect[k].box);
      EXPECT_EQ(m.sample.targets[k].cls, expect[k].cls);
    }
  }
}

TEST(Mosaic, ScaledTilesUsePerAxisFactors) {
  const Sample s = single_object(40, {10, 10, 30, 20}, 1);
  const Sample* four[4] = {&s, &s, &s, &s};
  Rng rng(4);
  const MosaicResult m = mosaic(four, 80, rng, 0.5, 1.5);
  for (const auto& t : m.tiles) {
    EXPECT_GE(t.scale_x, 0.5 - 1e-9);
    EXPECT_LE(t.scale_x, 1.5 + 1e-9);
  }
  EXPECT_THROW(mosaic(four, 80, rng, 0.0, 1.0), std::invalid_argument);
}

TEST(Letterbox, WideImage) {
  cv::Mat img(400, 800, CV_8UC3, cv::Scalar(1, 2, 3));
  LetterboxInfo info;
  const cv::Mat out = letterbox(img, 640, info);
  EXPECT_EQ(out.rows, 640);
  EXPECT_EQ(out.cols, 640);
  EXPECT_DOUBLE_EQ(info.scale, 0.8);
  EXPECT_EQ(info.pad_left, 0);
  EXPECT_EQ(info.pad_top, 160);  // 320 rows of padding in total
  EXPECT_EQ(out.at<cv::Vec3b>(0, 0), cv::Vec3b(kPadValue, kPadValue, kPadValue));
  EXPECT_EQ(out.at<cv::Vec3b>(320, 320), cv::Vec3b(1, 2, 3));
  const Box b{100, 50, 300, 250};
  const Box back = unletterbox_box(letterbox_box(b, info), info);
  EXPECT_NEAR(back.x1, b.x1, 0.5);
  EXPECT_NEAR(back.y2, b.y2, 0.5);
}

TEST(Letterbox, SquareIsPureResize) {
  cv::Mat img(100, 100, CV_8UC3, cv::Scalar(7, 7, 7));
  LetterboxInfo info;
  letterbox(img, 64, info);
  EXPECT_EQ(info.pad_left, 0);
  EXPECT_EQ(info.pad_top, 0);
  EXPECT_DOUBLE_EQ(info.scale, 0.64);
}

TEST(Letterbox, InverseWithinHalfPixel) {
  Rng rng(2);
  std::uniform_int_distribution<int> dim(20, 300);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const int w = dim(rng), h = dim(rng);
    cv::Mat img(h, w, CV_8UC3);
    LetterboxInfo info;
    letterbox(img, 128, info);
    const double x1 = u(rng) * w * 0.5, y1 = u(rng) * h * 0.5;
    const Box b{x1, y1, x1 + u(rng) * w * 0.5, y1 + u(rng) * h * 0.5};
    const Box back = unletterbox_box(letterbox_box(b, info), info);
    EXPECT_NEAR(back.x1, b.x1, 0.5);
    EXPECT_NEAR(back.y1, b.y1, 0.5);
    EXPECT_NEAR(back.x2, b.x2, 0.5);
    EXPECT_NEAR(back.y2, b.y2, 0.5);
  }
}

TEST(ToTensor, RgbOrderAndScale) {
  cv::Mat img(8, 8, CV_8UC3, cv::Scalar(255, 0, 51));  // BGR
  const Tensor t = to_tensor({img, img});
  EXPECT_EQ(t.shape(), (Shape{2, 3, 8, 8}));
  EXPECT_DOUBLE_EQ(t.data()[0], 0.2);       // R
  EXPECT_DOUBLE_EQ(t.data()[64], 0.0);      // G
  EXPECT_DOUBLE_EQ(t.data()[128], 1.0);     // B
  EXPECT_THROW(to_tensor({img, cv::Mat(4, 4, CV_8UC3)}), std::invalid_argument);
}
