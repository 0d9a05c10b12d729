#pragma once

#include <vector>

#include "mvr/geometry.hpp"
#include "mvr/process.hpp"

namespace mvr {

// Brute-force references for tests and acceptance runs. Deliberately simple:
// nothing here shares code with the Weiszfeld path beyond weber_value, so a
// disagreement localizes the bug.

struct GridSpec {
  Point lo;
  Point hi;
  double resolution = 0.0;  // cell edge
};

// Lattice node of `grid` minimizing the Weber sum. Exhaustive scan for small
// lattices; for large ones a coarse full pass followed by a full-resolution
// scan of a window around the coarse argmin (re-widened if the argmin lands
// on the window edge, which convexity makes rare). Requires nonempty B.
Point grid_median(const PointSet& points, const GridSpec& grid);

// Riemann sum of min_i |p_i - q| against a normalized raster density.
double grid_multimedian(const std::vector<Point>& positions,
                        const DensityRaster& raster);

enum class MeanUpdateRule {
  as_printed,  // p <- (c q + p) / (c + 1): the new sample carries weight c
  classical,   // p <- (c p + q) / (c + 1): running mean of assigned samples
};

// One online k-means update: the generator nearest to `sample` (ties to the
// lowest index) moves per the chosen rule and its counter increments.
// Counters must start at 1 and match `generators` in length.
void macqueen_step(std::vector<Point>& generators, std::vector<long>& counters,
                   Point sample, MeanUpdateRule rule = MeanUpdateRule::as_printed);

}  // namespace mvr
