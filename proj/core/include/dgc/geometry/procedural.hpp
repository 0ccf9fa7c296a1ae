#pragma once

#include "dgc/geometry/image.hpp"
#include "dgc/geometry/transform.hpp"

namespace dgc::geometry {

// Textured square image: multi-scale coloured value noise, random convex
// polygons and rotated checkerboard patches, lightly blurred.
Image generate_base_image(int size, Rng& rng);

}  // namespace dgc::geometry
