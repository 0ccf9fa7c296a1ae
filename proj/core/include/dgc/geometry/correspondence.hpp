#pragma once

#include <cstdint>
#include <vector>

#include "dgc/geometry/transform.hpp"
#include "dgc/tensor/tensor.hpp"

namespace dgc::geometry {

// Align-corners conversions between pixel index and normalized coordinate.
inline double pixel_to_normalized(double pixel, int size) {
  return size > 1 ? 2.0 * pixel / (size - 1) - 1.0 : 0.0;
}
inline double normalized_to_pixel(double u, int size) {
  return size > 1 ? (u + 1.0) * 0.5 * (size - 1) : 0.0;
}

/// Dense correspondence field. Entry (row, col) holds the normalized (u, v)
/// location in the warped image of the grid pixel (row, col); values may
/// leave [-1, 1] when the correspondence falls outside the frame.
struct CorrespondenceMap {
  int width = 0;
  int height = 0;
  std::vector<float> uv;  // height x width x 2, u before v

  CorrespondenceMap() = default;
  CorrespondenceMap(int w, int h) : width(w), height(h), uv(static_cast<std::size_t>(w) * h * 2) {}

  float u(int row, int col) const { return uv[2 * (static_cast<std::size_t>(row) * width + col)]; }
  float v(int row, int col) const {
    return uv[2 * (static_cast<std::size_t>(row) * width + col) + 1];
  }
  void set(int row, int col, double u, double v) {
    const auto i = 2 * (static_cast<std::size_t>(row) * width + col);
    uv[i] = static_cast<float>(u);
    uv[i + 1] = static_cast<float>(v);
  }

  bool operator==(const CorrespondenceMap&) const = default;
};

struct MatchabilityMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> valid;  // height x width, 0 or 1

  MatchabilityMask() = default;
  MatchabilityMask(int w, int h, bool value = false)
      : width(w), height(h), valid(static_cast<std::size_t>(w) * h, value ? 1 : 0) {}

  bool at(int row, int col) const { return valid[static_cast<std::size_t>(row) * width + col] != 0; }
  std::size_t count() const;
  double coverage() const;

  bool operator==(const MatchabilityMask&) const = default;
};

// Offset of a correspondence map from the identity grid. Kept in double so
// that the float map round-trips exactly.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> duv;
};

CorrespondenceMap identity_map(int width, int height);

// Maps every grid pixel centre through t; the mask marks entries inside
// [-1, 1]^2 (boundary inclusive).
struct GroundTruth {
  CorrespondenceMap map;
  MatchabilityMask mask;
};
GroundTruth gt_correspondence_map(const GeometricTransform& t, int width, int height);

// Mask of map entries inside [-1, 1]^2.
MatchabilityMask in_frame_mask(const CorrespondenceMap& m);

FlowField map_to_flow(const CorrespondenceMap& m);
CorrespondenceMap flow_to_map(const FlowField& f);

// Tensor views used by the network: 1 x 2 x H x W and 1 x 1 x H x W.
Tensor map_to_tensor(const CorrespondenceMap& m);
CorrespondenceMap tensor_to_map(const Tensor& t, std::int64_t batch_index = 0);
Tensor mask_to_tensor(const MatchabilityMask& m);
MatchabilityMask tensor_to_mask(const Tensor& probabilities, float threshold,
                                std::int64_t batch_index = 0);

// Coarser level of a ground-truth pyramid: the map is bilinearly resampled
// at the coarse pixel centres (same normalized coordinates), and a coarse
// pixel is valid only if every fine pixel of its 2x2 support is valid.
GroundTruth downsample_ground_truth(const GroundTruth& fine, int width, int height);

}  // namespace dgc::geometry
