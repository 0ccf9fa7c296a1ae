#include "dgc/error.hpp"
#include "dgc/pose/pose.hpp"

namespace dgc::pose {

MatchSet matches_from_map(const geometry::CorrespondenceMap& map,
                          std::optional<std::span<const float>> confidence,
                          const MatchOptions& options) {
  if (options.stride <= 0) throw UsageError("matches_from_map: stride must be positive");
  const std::size_t plane = static_cast<std::size_t>(map.width) * map.height;
  if (confidence && confidence->size() != plane) {
    throw ShapeError("matches_from_map: confidence size differs from map");
  }
  MatchSet ms;
  for (int i = 0; i < map.height; i += options.stride) {
    for (int j = 0; j < map.width; j += options.stride) {
      const std::size_t p = static_cast<std::size_t>(i) * map.width + j;
      const double conf = confidence ? (*confidence)[p] : 1.0;
      if (conf < options.threshold) continue;
      const double u = map.u(i, j), v = map.v(i, j);
      if (!(u >= -1.0 && u <= 1.0 && v >= -1.0 && v <= 1.0)) continue;
      ms.matches.push_back({Eigen::Vector2d(j, i),
                            Eigen::Vector2d(geometry::normalized_to_pixel(u, map.width),
                                            geometry::normalized_to_pixel(v, map.height)),
                            conf});
    }
  }
  if (ms.size() < kMinMatches) throw DataError("fewer than 8 matches");
  return ms;
}

}  // namespace dgc::pose
