#pragma once

#include "roofkit/geometry.hpp"
#include "roofkit/instances.hpp"

namespace roofkit {

// Traces the pixel-edge boundary of every instance. Each connected piece
// becomes one Polygon (exterior plus holes) carrying the instance's id,
// class and confidence; vertices sit on pixel corners and only direction
// changes are kept. Pixels touching only at a corner are traced as
// separate pieces, so every ring is simple. Rasterizing the output at pixel
// centres reproduces each instance's pixel set exactly.
PolygonSet polygonize(const InstanceSet& instances);

}  // namespace roofkit
