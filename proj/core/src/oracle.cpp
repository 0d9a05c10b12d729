#include "mvr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace mvr {

namespace {

struct Lattice {
  Point lo;
  double res;
  long nx;
  long ny;
  Point node(long i, long j) const { return {lo.x + i * res, lo.y + j * res}; }
};

// Scan lattice nodes with indices in [i0,i1] x [j0,j1] at the given stride,
// returning the (i, j) of the minimal Weber value (row-major first on ties).
std::pair<long, long> scan(const Lattice& lat, const PointSet& points,
                           long i0, long i1, long j0, long j1, long stride) {
  double best = std::numeric_limits<double>::infinity();
  std::pair<long, long> arg{i0, j0};
  for (long j = j0; j <= j1; j += stride) {
    for (long i = i0; i <= i1; i += stride) {
      const double v = weber_value(lat.node(i, j), points);
      if (v < best) {
        best = v;
        arg = {i, j};
      }
    }
  }
  return arg;
}

}  // namespace

Point grid_median(const PointSet& points, const GridSpec& grid) {
  if (points.empty()) throw std::invalid_argument("grid_median: empty point set");
  if (grid.resolution <= 0.0) throw std::invalid_argument("grid_median: resolution must be positive");

  Lattice lat;
  lat.lo = grid.lo;
  lat.res = grid.resolution;
  lat.nx = static_cast<long>(std::floor((grid.hi.x - grid.lo.x) / grid.resolution)) + 1;
  lat.ny = static_cast<long>(std::floor((grid.hi.y - grid.lo.y) / grid.resolution)) + 1;
  if (lat.nx < 1 || lat.ny < 1) throw std::invalid_argument("grid_median: empty lattice");

  constexpr long kFullScanLimit = 200 * 200;
  if (lat.nx * lat.ny <= kFullScanLimit) {
    const auto [i, j] = scan(lat, points, 0, lat.nx - 1, 0, lat.ny - 1, 1);
    return lat.node(i, j);
  }

  // Coarse pass over a sublattice, then a full-resolution window around the
  // coarse argmin. The window is sized from the coarse spacing; if the fine
  // argmin lands on the window edge the window is doubled and rescanned.
  const long stride = std::max<long>(
      2, static_cast<long>(std::ceil(std::max(lat.nx, lat.ny) / 128.0)));
  const auto [ci, cj] = scan(lat, points, 0, lat.nx - 1, 0, lat.ny - 1, stride);

  long half = stride * 16;
  while (true) {
    const long i0 = std::max<long>(0, ci - half);
    const long i1 = std::min(lat.nx - 1, ci + half);
    const long j0 = std::max<long>(0, cj - half);
    const long j1 = std::min(lat.ny - 1, cj + half);
    const auto [fi, fj] = scan(lat, points, i0, i1, j0, j1, 1);
    const bool on_edge = (fi == i0 && i0 > 0) || (fi == i1 && i1 < lat.nx - 1) ||
                         (fj == j0 && j0 > 0) || (fj == j1 && j1 < lat.ny - 1);
    if (!on_edge) return lat.node(fi, fj);
    half *= 2;
    if (half > std::max(lat.nx, lat.ny)) {
      const auto [gi, gj] = scan(lat, points, 0, lat.nx - 1, 0, lat.ny - 1, 1);
      return lat.node(gi, gj);
    }
  }
}

double grid_multimedian(const std::vector<Point>& positions,
                        const DensityRaster& raster) {
  if (positions.empty()) throw std::invalid_argument("grid_multimedian: no positions");
  double acc = 0.0;
  for (int r = 0; r < raster.rows; ++r) {
    for (int c = 0; c < raster.cols; ++c) {
      const double w = raster.weight(r, c);
      if (w == 0.0) continue;
      const Point q = raster.cell_center(r, c);
      double d2 = std::numeric_limits<double>::infinity();
      for (const Point& p : positions) d2 = std::min(d2, dist2(p, q));
      acc += w * std::sqrt(d2);
    }
  }
  return acc;
}

void macqueen_step(std::vector<Point>& generators, std::vector<long>& counters,
                   Point sample, MeanUpdateRule rule) {
  if (generators.empty() || generators.size() != counters.size()) {
    throw std::invalid_argument("macqueen_step: generators/counters size mismatch");
  }
  std::size_t nearest = 0;
  double best = dist2(generators[0], sample);
  for (std::size_t i = 1; i < generators.size(); ++i) {
    const double d = dist2(generators[i], sample);
    if (d < best) {
      best = d;
      nearest = i;
    }
  }
  const long c = counters[nearest];
  if (c < 1) throw std::invalid_argument("macqueen_step: counters must start at 1");
  const Point p = generators[nearest];
  const double cc = static_cast<double>(c);
  if (rule == MeanUpdateRule::as_printed) {
    generators[nearest] = (1.0 / (cc + 1.0)) * (cc * sample + p);
  } else {
    generators[nearest] = (1.0 / (cc + 1.0)) * (cc * p + sample);
  }
  counters[nearest] = c + 1;
}

}  // namespace mvr
