#include "dgc/geometry/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "dgc/error.hpp"

namespace dgc::geometry {

void sample_bilinear(const Image& img, double x, double y, float out[3]) {
  const double fx = std::floor(x), fy = std::floor(y);
  const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
  const double ax = x - fx, ay = y - fy;
  double acc[3] = {0, 0, 0};
  const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
  const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
  const double ws[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
  for (int t = 0; t < 4; ++t) {
    if (ws[t] == 0.0 || xs[t] < 0 || ys[t] < 0 || xs[t] >= img.width || ys[t] >= img.height) {
      continue;
    }
    for (int c = 0; c < 3; ++c) acc[c] += ws[t] * img.at(ys[t], xs[t], c);
  }
  for (int c = 0; c < 3; ++c) out[c] = static_cast<float>(acc[c]);
}

Image crop(const Image& img, int x0, int y0, int width, int height) {
  if (x0 < 0 || y0 < 0 || x0 + width > img.width || y0 + height > img.height) {
    throw ShapeError("crop: window exceeds image");
  }
  Image out(width, height);
  for (int i = 0; i < height; ++i)
    for (int j = 0; j < width; ++j)
      for (int c = 0; c < 3; ++c) out.at(i, j, c) = img.at(y0 + i, x0 + j, c);
  return out;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<unsigned char> bytes(img.rgb.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<unsigned char>(std::lround(std::clamp(img.rgb[i], 0.0f, 1.0f) * 255.0f));
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw DataError("short write to " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  is >> magic >> w >> h >> maxval;
  if (magic != "P6" || w <= 0 || h <= 0 || maxval != 255) {
    throw DataError("unsupported PPM header in " + path.string());
  }
  is.get();
  Image img(w, h);
  std::vector<unsigned char> bytes(img.rgb.size());
  if (!is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw DataError("truncated PPM " + path.string());
  }
  for (std::size_t i = 0; i < bytes.size(); ++i) img.rgb[i] = bytes[i] / 255.0f;
  return img;
}

Image quantize8(const Image& img) {
  Image out = img;
  for (auto& v : out.rgb) v = std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f) / 255.0f;
  return out;
}

Tensor image_to_tensor(const Image& img) {
  const std::size_t plane = static_cast<std::size_t>(img.width) * img.height;
  std::vector<float> data(3 * plane);
  for (std::size_t p = 0; p < plane; ++p)
    for (int c = 0; c < 3; ++c) data[c * plane + p] = img.rgb[p * 3 + c];
  return Tensor::from_data({1, 3, img.height, img.width}, std::move(data));
}

}  // namespace dgc::geometry
