#include "dgc/geometry/procedural.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace dgc::geometry {

namespace {

using Rgb = std::array<float, 3>;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Rgb random_color(Rng& rng) {
  return {static_cast<float>(uniform(rng, 0, 1)), static_cast<float>(uniform(rng, 0, 1)),
          static_cast<float>(uniform(rng, 0, 1))};
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

void add_value_noise(Image& img, Rng& rng, int spacing, float amplitude) {
  const int cells = img.width / spacing + 2;
  std::vector<Rgb> lattice(static_cast<std::size_t>(cells) * cells);
  for (auto& c : lattice) c = random_color(rng);
  for (int i = 0; i < img.height; ++i) {
    const double gy = static_cast<double>(i) / spacing;
    const int y0 = static_cast<int>(gy);
    const double ty = smoothstep(gy - y0);
    for (int j = 0; j < img.width; ++j) {
      const double gx = static_cast<double>(j) / spacing;
      const int x0 = static_cast<int>(gx);
      const double tx = smoothstep(gx - x0);
      for (int c = 0; c < 3; ++c) {
        const double a = lattice[y0 * cells + x0][c], b = lattice[y0 * cells + x0 + 1][c];
        const double d = lattice[(y0 + 1) * cells + x0][c], e = lattice[(y0 + 1) * cells + x0 + 1][c];
        const double v = (1 - ty) * ((1 - tx) * a + tx * b) + ty * ((1 - tx) * d + tx * e);
        img.at(i, j, c) += amplitude * static_cast<float>(v);
      }
    }
  }
}

// Coverage-weighted blend of an indicator function, 4x4 supersampled.
template <typename Inside, typename Color>
void blend_shape(Image& img, double alpha, Inside inside, Color color) {
  constexpr int kSub = 4;
  for (int i = 0; i < img.height; ++i) {
    for (int j = 0; j < img.width; ++j) {
      int hits = 0;
      Rgb acc{0, 0, 0};
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const double x = j + (sx + 0.5) / kSub - 0.5, y = i + (sy + 0.5) / kSub - 0.5;
          if (!inside(x, y)) continue;
          ++hits;
          const Rgb c = color(x, y);
          for (int k = 0; k < 3; ++k) acc[k] += c[k];
        }
      }
      if (hits == 0) continue;
      const double cover = alpha * hits / (kSub * kSub);
      for (int k = 0; k < 3; ++k) {
        const double c = acc[k] / hits;
        img.at(i, j, k) = static_cast<float>((1 - cover) * img.at(i, j, k) + cover * c);
      }
    }
  }
}

void add_polygon(Image& img, Rng& rng) {
  const double cx = uniform(rng, 0, img.width), cy = uniform(rng, 0, img.height);
  const double radius = uniform(rng, 0.05, 0.25) * img.width;
  const int sides = std::uniform_int_distribution<int>(3, 7)(rng);
  std::vector<double> angles(static_cast<std::size_t>(sides));
  for (auto& a : angles) a = uniform(rng, 0, 2 * std::numbers::pi);
  std::sort(angles.begin(), angles.end());
  std::vector<std::array<double, 2>> pts;
  for (double a : angles) pts.push_back({cx + radius * std::cos(a), cy + radius * std::sin(a)});
  const Rgb color = random_color(rng);
  const double alpha = uniform(rng, 0.6, 1.0);
  // Vertices sorted by angle around an interior point form a star-shaped
  // polygon; the even-odd rule handles it.
  auto inside = [&pts](double x, double y) {
    bool in = false;
    for (std::size_t a = 0, b = pts.size() - 1; a < pts.size(); b = a++) {
      const auto& p = pts[a];
      const auto& q = pts[b];
      if ((p[1] > y) != (q[1] > y) && x < (q[0] - p[0]) * (y - p[1]) / (q[1] - p[1]) + p[0]) {
        in = !in;
      }
    }
    return in;
  };
  blend_shape(img, alpha, inside, [&color](double, double) { return color; });
}

void add_checkerboard(Image& img, Rng& rng) {
  const double cx = uniform(rng, 0.2, 0.8) * img.width, cy = uniform(rng, 0.2, 0.8) * img.height;
  const double half = uniform(rng, 0.1, 0.25) * img.width;
  const double period = uniform(rng, 4.0, 10.0);
  const double theta = uniform(rng, 0, std::numbers::pi / 2);
  const double ct = std::cos(theta), st = std::sin(theta);
  const Rgb a = random_color(rng), b = random_color(rng);
  auto local = [=](double x, double y) {
    return std::array<double, 2>{ct * (x - cx) + st * (y - cy), -st * (x - cx) + ct * (y - cy)};
  };
  blend_shape(
      img, 1.0,
      [&](double x, double y) {
        const auto l = local(x, y);
        return std::abs(l[0]) < half && std::abs(l[1]) < half;
      },
      [&](double x, double y) {
        const auto l = local(x, y);
        const auto cell = static_cast<long>(std::floor(l[0] / period)) +
                          static_cast<long>(std::floor(l[1] / period));
        return (cell & 1) ? a : b;
      });
}

void blur_binomial(Image& img) {
  Image tmp = img;
  const float k[3] = {0.25f, 0.5f, 0.25f};
  for (int pass = 0; pass < 2; ++pass) {
    const Image& src = pass == 0 ? img : tmp;
    Image& dst = pass == 0 ? tmp : img;
    for (int i = 0; i < img.height; ++i) {
      for (int j = 0; j < img.width; ++j) {
        for (int c = 0; c < 3; ++c) {
          float acc = 0.0f;
          for (int t = -1; t <= 1; ++t) {
            const int ii = pass == 1 ? std::clamp(i + t, 0, img.height - 1) : i;
            const int jj = pass == 0 ? std::clamp(j + t, 0, img.width - 1) : j;
            acc += k[t + 1] * src.at(ii, jj, c);
          }
          dst.at(i, j, c) = acc;
        }
      }
    }
  }
}

}  // namespace

Image generate_base_image(int size, Rng& rng) {
  Image img(size, size);
  float amplitude = 0.5f;
  float total = 0.0f;
  for (int spacing : {32, 16, 8, 4}) {
    if (spacing >= size) continue;
    add_value_noise(img, rng, spacing, amplitude);
    total += amplitude;
    amplitude *= 0.6f;
  }
  if (total > 0) {
    for (auto& v : img.rgb) v /= total;
  }
  const int polygons = std::uniform_int_distribution<int>(6, 12)(rng);
  for (int p = 0; p < polygons; ++p) add_polygon(img, rng);
  const int boards = std::uniform_int_distribution<int>(1, 2)(rng);
  for (int b = 0; b < boards; ++b) add_checkerboard(img, rng);
  blur_binomial(img);
  for (auto& v : img.rgb) v = std::clamp(v, 0.0f, 1.0f);
  return img;
}

}  // namespace dgc::geometry
