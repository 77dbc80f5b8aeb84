#include "omnisweep/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace omnisweep {

ImageF read_png_gray(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (m.empty()) throw std::runtime_error("png: cannot read: " + path);

  const double scale = m.depth() == CV_16U ? 1.0 / 65535.0 : 1.0 / 255.0;
  if (m.depth() != CV_8U && m.depth() != CV_16U)
    throw std::runtime_error("png: " + path + ": unsupported bit depth");

  ImageF img(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      double v = 0;
      if (m.channels() == 1) {
        v = m.depth() == CV_16U ? m.at<uint16_t>(y, x) : m.at<uint8_t>(y, x);
      } else if (m.channels() >= 3) {  // OpenCV stores BGR
        double b, g, r;
        if (m.depth() == CV_16U) {
          const auto* p = m.ptr<uint16_t>(y) + size_t(x) * m.channels();
          b = p[0], g = p[1], r = p[2];
        } else {
          const auto* p = m.ptr<uint8_t>(y) + size_t(x) * m.channels();
          b = p[0], g = p[1], r = p[2];
        }
        v = 0.299 * r + 0.587 * g + 0.114 * b;
      } else {
        throw std::runtime_error("png: " + path + ": unsupported channel count");
      }
      img.at(y, x) = float(v * scale);
    }
  }
  return img;
}

void write_png_gray8(const std::string& path, const ImageF& image) {
  cv::Mat m(image.height, image.width, CV_8U);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const double v = std::clamp(double(image.at(y, x)), 0.0, 1.0);
      m.at<uint8_t>(y, x) = uint8_t(std::lround(v * 255.0));
    }
  if (!cv::imwrite(path, m)) throw std::runtime_error("png: cannot write: " + path);
}

void write_png_depth_mm(const std::string& path, const ImageF& depth_m) {
  cv::Mat m(depth_m.height, depth_m.width, CV_16U);
  for (int y = 0; y < depth_m.height; ++y)
    for (int x = 0; x < depth_m.width; ++x) {
      const double mm = std::clamp(double(depth_m.at(y, x)) * 1000.0, 0.0, 65535.0);
      m.at<uint16_t>(y, x) = uint16_t(std::lround(mm));
    }
  if (!cv::imwrite(path, m)) throw std::runtime_error("png: cannot write: " + path);
}

ImageF read_png_depth_mm(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (m.empty()) throw std::runtime_error("png: cannot read: " + path);
  if (m.depth() != CV_16U || m.channels() != 1)
    throw std::runtime_error("png: " + path + ": expected 16-bit single-channel depth");
  ImageF img(m.cols, m.rows);
  for (int y = 0; y < m.rows; ++y)
    for (int x = 0; x < m.cols; ++x) img.at(y, x) = float(m.at<uint16_t>(y, x) / 1000.0);
  return img;
}

}  // namespace omnisweep
