#include "dgc/geometry/render.hpp"

namespace dgc::geometry {

TrainingPair render_pair(const Image& base, const GeometricTransform& t, int resolution) {
  if (base.width < resolution || base.height < resolution) {
    throw ShapeError("render_pair: base image smaller than target resolution");
  }
  const int x_off = (base.width - resolution) / 2;
  const int y_off = (base.height - resolution) / 2;

  TrainingPair pair;
  pair.transform = t;
  auto gt = gt_correspondence_map(t, resolution, resolution);
  if (1.0 - gt.mask.coverage() > kMaxInvalidFraction) {
    throw PairRejected("render_pair: more than 80% of the pixels leave the frame");
  }
  pair.gt_map = std::move(gt.map);
  pair.gt_mask = std::move(gt.mask);
  pair.target_image = crop(base, x_off, y_off, resolution, resolution);

  pair.source_image = Image(resolution, resolution);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      const Point y(pixel_to_normalized(j, resolution), pixel_to_normalized(i, resolution));
      const Point x = invert_point(t, y);
      float rgb[3];
      sample_bilinear(base, x_off + normalized_to_pixel(x.x(), resolution),
                      y_off + normalized_to_pixel(x.y(), resolution), rgb);
      for (int c = 0; c < 3; ++c) pair.source_image.at(i, j, c) = rgb[c];
    }
  }
  return pair;
}

Image warp_by_map(const Image& source, const CorrespondenceMap& map) {
  Image out(map.width, map.height);
  for (int i = 0; i < map.height; ++i) {
    for (int j = 0; j < map.width; ++j) {
      float rgb[3];
      sample_bilinear(source, normalized_to_pixel(map.u(i, j), source.width),
                      normalized_to_pixel(map.v(i, j), source.height), rgb);
      for (int c = 0; c < 3; ++c) out.at(i, j, c) = rgb[c];
    }
  }
  return out;
}

}  // namespace dgc::geometry
