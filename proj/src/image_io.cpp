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

#include "vfi360/image_io.hpp"

#include <cmath>
#include <opencv2/imgcodecs.hpp>

namespace vfi360::io {

Tensor read_frame(const std::string& path) {
  cv::Mat img = cv::imread(path, cv::IMREAD_COLOR);
  if (img.empty()) throw std::runtime_error("read_frame: cannot decode " + path);
  Tensor t({3, img.rows, img.cols});
  for (int y = 0; y < img.rows; ++y) {
    const cv::Vec3b* row = img.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.cols; ++x) {
      // OpenCV loads BGR
      t.at(0, y, x) = row[x][2] / 255.0;
      t.at(1, y, x) = row[x][1] / 255.0;
      t.at(2, y, x) = row[x][0] / 255.0;
    }
  }
  return t;
}

void write_frame(const Tensor& frame, const std::string& path) {
  if (frame.ndim() != 3 || frame.dim(0) != 3) {
    throw std::invalid_argument("write_frame: frame must be {3,H,W}");
  }
  const int H = frame.dim(1), W = frame.dim(2);
  cv::Mat img(H, W, CV_8UC3);
  auto to_u8 = [](double v) {
    const double s = std::round(std::min(1.0, std::max(0.0, v)) * 255.0);
    return static_cast<unsigned char>(s);
  };
  for (int y = 0; y < H; ++y) {
    cv::Vec3b* row = img.ptr<cv::Vec3b>(y);
    for (int x = 0; x < W; ++x) {
      row[x][2] = to_u8(frame.at(0, y, x));
      row[x][1] = to_u8(frame.at(1, y, x));
      row[x][0] = to_u8(frame.at(2, y, x));
    }
  }
  if (!cv::imwrite(path, img)) throw std::runtime_error("write_frame: cannot write " + path);
}

}  // namespace vfi360::io
