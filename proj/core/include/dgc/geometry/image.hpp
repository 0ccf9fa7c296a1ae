#pragma once

#include <filesystem>
#include <vector>

#include "dgc/tensor/tensor.hpp"

namespace dgc::geometry {

// H x W x 3 float image, values in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> rgb;

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0.0f) {}

  float& at(int row, int col, int ch) {
    return rgb[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
  }
  float at(int row, int col, int ch) const {
    return rgb[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
  }

  bool operator==(const Image&) const = default;
};

// Bilinear sample at pixel coordinates; reads zero outside the image.
void sample_bilinear(const Image& img, double x, double y, float out[3]);

Image crop(const Image& img, int x0, int y0, int width, int height);

// Values are rounded to 8 bits on write.
void write_ppm(const std::filesystem::path& path, const Image& img);
Image read_ppm(const std::filesystem::path& path);
// Quantizes to the 8-bit grid used by the PPM files.
Image quantize8(const Image& img);

// 1 x 3 x H x W network input.
Tensor image_to_tensor(const Image& img);

}  // namespace dgc::geometry
