/*
 * Copyright 2026 The FasterX Authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include "fasterx/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "json.hpp"

namespace fasterx {

Series read_series(const std::string& log_path, const std::string& metric, const std::string& label) {
  std::ifstream in(log_path);
  if (!in) throw std::runtime_error("cannot open log " + log_path);
  Series s;
  s.label = label;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(log_path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.contains(metric) || !j[metric].is_number() || !j.contains("epoch")) continue;
    s.points.emplace_back(j["epoch"].get<double>(), j[metric].get<double>());
  }
  return s;
}

namespace {

const cv::Scalar kColors[] = {{200, 80, 30}, {30, 120, 230}, {60, 170, 60}, {40, 40, 200},
                              {160, 60, 160}, {40, 160, 190}, {90, 90, 90}};

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

int render_plot(const std::vector<Series>& series, const std::string& title,
                const std::string& y_label, const std::string& png_path, int width, int height) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  int drawn = 0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x1 = x0 + 1;
  if (y1 - y0 < 1e-12) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  cv::Mat img(height, width, CV_8UC3, cv::Scalar(255, 255, 255));
  const int left = 70, right = 20, top = 40, bottom = 50;
  const int pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + static_cast<int>(std::lround((x - x0) / (x1 - x0) * pw)); };
  auto py = [&](double y) { return top + ph - static_cast<int>(std::lround((y - y0) / (y1 - y0) * ph)); };
  const cv::Scalar ink(30, 30, 30), grid(225, 225, 225);
  const auto font = cv::FONT_HERSHEY_SIMPLEX;
  for (int t = 0; t <= 5; ++t) {
    const double yv = y0 + (y1 - y0) * t / 5.0, xv = x0 + (x1 - x0) * t / 5.0;
    cv::line(img, {left, py(yv)}, {left + pw, py(yv)}, grid, 1);
    cv::line(img, {px(xv), top}, {px(xv), top + ph}, grid, 1);
    cv::putText(img, tick(yv), {5, py(yv) + 4}, font, 0.4, ink, 1, cv::LINE_AA);
    cv::putText(img, tick(xv), {px(xv) - 10, top + ph + 18}, font, 0.4, ink, 1, cv::LINE_AA);
  }
  cv::rectangle(img, {left, top}, {left + pw, top + ph}, ink, 1);
  cv::putText(img, title, {left, 25}, font, 0.6, ink, 1, cv::LINE_AA);
  cv::putText(img, "epoch", {left + pw / 2 - 20, height - 10}, font, 0.45, ink, 1, cv::LINE_AA);
  cv::putText(img, y_label, {left + 5, top + 15}, font, 0.45, ink, 1, cv::LINE_AA);

  int legend_y = top + 20;
  for (size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    if (s.points.empty()) continue;
    const cv::Scalar c = kColors[i % std::size(kColors)];
    std::vector<cv::Point> pts;
    for (const auto& [x, y] : s.points) pts.emplace_back(px(x), py(y));
    cv::polylines(img, pts, false, c, 2, cv::LINE_AA);
    for (const auto& p : pts) cv::circle(img, p, 3, c, cv::FILLED, cv::LINE_AA);
    cv::line(img, {left + pw - 170, legend_y - 4}, {left + pw - 145, legend_y - 4}, c, 2);
    cv::putText(img, s.label, {left + pw - 140, legend_y}, font, 0.45, ink, 1, cv::LINE_AA);
    legend_y += 18;
    ++drawn;
  }
  if (!cv::imwrite(png_path, img)) throw std::runtime_error("cannot write plot " + png_path);
  return drawn;
}

}  // namespace fasterx
