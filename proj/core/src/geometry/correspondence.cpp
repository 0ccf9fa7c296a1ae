#include "dgc/geometry/correspondence.hpp"

#include <algorithm>
#include <cmath>

#include "dgc/error.hpp"

namespace dgc::geometry {

std::size_t MatchabilityMask::count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

double MatchabilityMask::coverage() const {
  return valid.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(valid.size());
}

CorrespondenceMap identity_map(int width, int height) {
  CorrespondenceMap m(width, height);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      m.set(i, j, pixel_to_normalized(j, width), pixel_to_normalized(i, height));
    }
  }
  return m;
}

namespace {

bool inside_frame(double u, double v) { return u >= -1.0 && u <= 1.0 && v >= -1.0 && v <= 1.0; }

}  // namespace

GroundTruth gt_correspondence_map(const GeometricTransform& t, int width, int height) {
  GroundTruth gt{CorrespondenceMap(width, height), MatchabilityMask(width, height)};
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      const Point p(pixel_to_normalized(j, width), pixel_to_normalized(i, height));
      const Point q = apply_transform(t, p);
      gt.map.set(i, j, q.x(), q.y());
      gt.mask.valid[static_cast<std::size_t>(i) * width + j] =
          inside_frame(gt.map.u(i, j), gt.map.v(i, j)) ? 1 : 0;
    }
  }
  return gt;
}

MatchabilityMask in_frame_mask(const CorrespondenceMap& m) {
  MatchabilityMask mask(m.width, m.height);
  for (int i = 0; i < m.height; ++i) {
    for (int j = 0; j < m.width; ++j) {
      mask.valid[static_cast<std::size_t>(i) * m.width + j] =
          inside_frame(m.u(i, j), m.v(i, j)) ? 1 : 0;
    }
  }
  return mask;
}

FlowField map_to_flow(const CorrespondenceMap& m) {
  const auto id = identity_map(m.width, m.height);
  FlowField f{m.width, m.height, std::vector<double>(m.uv.size())};
  // Both operands are floats, so the double difference is exact.
  for (std::size_t i = 0; i < m.uv.size(); ++i) {
    f.duv[i] = static_cast<double>(m.uv[i]) - static_cast<double>(id.uv[i]);
  }
  return f;
}

CorrespondenceMap flow_to_map(const FlowField& f) {
  auto m = identity_map(f.width, f.height);
  for (std::size_t i = 0; i < m.uv.size(); ++i) {
    m.uv[i] = static_cast<float>(static_cast<double>(m.uv[i]) + f.duv[i]);
  }
  return m;
}

Tensor map_to_tensor(const CorrespondenceMap& m) {
  const std::size_t plane = static_cast<std::size_t>(m.width) * m.height;
  std::vector<float> data(2 * plane);
  for (std::size_t p = 0; p < plane; ++p) {
    data[p] = m.uv[2 * p];
    data[plane + p] = m.uv[2 * p + 1];
  }
  return Tensor::from_data({1, 2, m.height, m.width}, std::move(data));
}

CorrespondenceMap tensor_to_map(const Tensor& t, std::int64_t batch_index) {
  if (t.rank() != 4 || t.dim(1) != 2) throw ShapeError("tensor_to_map: expected N x 2 x H x W");
  const auto h = static_cast<int>(t.dim(2)), w = static_cast<int>(t.dim(3));
  CorrespondenceMap m(w, h);
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  const float* base = t.data().data() + batch_index * 2 * plane;
  for (std::size_t p = 0; p < plane; ++p) {
    m.uv[2 * p] = base[p];
    m.uv[2 * p + 1] = base[plane + p];
  }
  return m;
}

Tensor mask_to_tensor(const MatchabilityMask& m) {
  std::vector<float> data(m.valid.begin(), m.valid.end());
  return Tensor::from_data({1, 1, m.height, m.width}, std::move(data));
}

MatchabilityMask tensor_to_mask(const Tensor& probabilities, float threshold,
                                std::int64_t batch_index) {
  if (probabilities.rank() != 4 || probabilities.dim(1) != 1) {
    throw ShapeError("tensor_to_mask: expected N x 1 x H x W");
  }
  const auto h = static_cast<int>(probabilities.dim(2)), w = static_cast<int>(probabilities.dim(3));
  MatchabilityMask m(w, h);
  const float* base = probabilities.data().data() + batch_index * m.valid.size();
  for (std::size_t p = 0; p < m.valid.size(); ++p) m.valid[p] = base[p] >= threshold ? 1 : 0;
  return m;
}

GroundTruth downsample_ground_truth(const GroundTruth& fine, int width, int height) {
  const int fw = fine.map.width, fh = fine.map.height;
  GroundTruth out{CorrespondenceMap(width, height), MatchabilityMask(width, height)};
  for (int i = 0; i < height; ++i) {
    const double py = normalized_to_pixel(pixel_to_normalized(i, height), fh);
    const int y0 = std::clamp(static_cast<int>(std::floor(py)), 0, fh - 1);
    const int y1 = std::min(y0 + 1, fh - 1);
    const double ay = py - y0;
    for (int j = 0; j < width; ++j) {
      const double px = normalized_to_pixel(pixel_to_normalized(j, width), fw);
      const int x0 = std::clamp(static_cast<int>(std::floor(px)), 0, fw - 1);
      const int x1 = std::min(x0 + 1, fw - 1);
      const double ax = px - x0;
      auto lerp = [&](auto getter) {
        return (1 - ay) * ((1 - ax) * getter(y0, x0) + ax * getter(y0, x1)) +
               ay * ((1 - ax) * getter(y1, x0) + ax * getter(y1, x1));
      };
      const double u = lerp([&](int r, int c) { return static_cast<double>(fine.map.u(r, c)); });
      const double v = lerp([&](int r, int c) { return static_cast<double>(fine.map.v(r, c)); });
      out.map.set(i, j, u, v);
      const bool ok = fine.mask.at(y0, x0) && fine.mask.at(y0, x1) && fine.mask.at(y1, x0) &&
                      fine.mask.at(y1, x1);
      out.mask.valid[static_cast<std::size_t>(i) * width + j] = ok ? 1 : 0;
    }
  }
  return out;
}

}  // namespace dgc::geometry
