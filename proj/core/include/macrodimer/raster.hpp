#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace macrodimer {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top row first
};

/// Linear map of [lo, hi] to [0, 255]. Matrix row 0 becomes the bottom image
/// row so that the vertical axis increases upwards.
GrayImage to_gray(const Eigen::MatrixXd& values, double lo, double hi);

/// Binary portable graymap (P5).
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
void write_png(const std::filesystem::path& path, const GrayImage& image);

}  // namespace macrodimer
