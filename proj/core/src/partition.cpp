#include "mvr/partition.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace mvr {

namespace {

constexpr double kCoincidenceTol = 1e-12;
constexpr double kAreaRelTol = 1e-6;
constexpr double kPerturb = 1e-9;

}  // namespace

std::size_t nearest_agent(Point q, const std::vector<Point>& positions) {
  if (positions.empty()) throw std::invalid_argument("nearest_agent: no positions");
  std::size_t best = 0;
  double best_d = dist2(q, positions[0]);
  for (std::size_t j = 1; j < positions.size(); ++j) {
    const double d = dist2(q, positions[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

bool in_voronoi_cell(std::size_t i, Point q, const std::vector<Point>& positions) {
  if (i >= positions.size()) throw std::invalid_argument("in_voronoi_cell: bad agent index");
  const double r = dist2(q, positions[i]);
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (j == i) continue;
    const double d = dist2(q, positions[j]);
    if (d < r) return false;            // agent j inside the circle
    if (d == r && j < i) return false;  // boundary tie to the lower index
  }
  return true;
}

Tessellation voronoi_cells(const std::vector<Point>& positions,
                           const Polygon& workspace) {
  if (positions.empty()) throw std::invalid_argument("voronoi_cells: no generators");
  if (workspace.size() < 3) throw std::invalid_argument("voronoi_cells: degenerate workspace");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      if (dist(positions[i], positions[j]) < kCoincidenceTol) {
        throw CoincidentGenerators("voronoi_cells: generators " + std::to_string(i) +
                                   " and " + std::to_string(j) + " coincide");
      }
    }
  }

  Tessellation tess;
  tess.generators = positions;
  tess.cells.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    Polygon cell = workspace;
    for (std::size_t j = 0; j < positions.size() && !cell.empty(); ++j) {
      if (j == i) continue;
      const Point mid = 0.5 * (positions[i] + positions[j]);
      cell = clip_halfplane(cell, mid, positions[j] - positions[i]);
    }
    tess.cells.push_back(std::move(cell));
  }

  const double total = polygon_area(workspace);
  double sum = 0.0;
  for (const Polygon& cell : tess.cells) {
    if (cell.size() >= 3) sum += polygon_area(cell);
  }
  if (std::abs(sum - total) > kAreaRelTol * total) {
    throw std::runtime_error("voronoi_cells: cells do not tile the workspace (area " +
                             std::to_string(sum) + " vs " + std::to_string(total) + ")");
  }
  return tess;
}

DensityIntegrator::DensityIntegrator(const SpatialDensity* density, int budget,
                                     std::uint64_t seed)
    : density_(density), budget_(budget), seed_(seed) {
  if (density == nullptr) throw std::invalid_argument("DensityIntegrator: null density");
  if (budget < 2) throw std::invalid_argument("DensityIntegrator: budget too small");
}

McEstimate multimedian_value(const std::vector<Point>& positions,
                             const DensityIntegrator& integrator,
                             const Polygon& workspace) {
  if (positions.empty()) throw std::invalid_argument("multimedian_value: no positions");
  (void)workspace;  // the density support is the integration domain
  std::mt19937_64 rng = make_rng(integrator.seed(), "integrator");
  const int n = integrator.budget();
  double sum = 0.0;
  double sum2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const Point q = integrator.density().sample(rng);
    double d2 = std::numeric_limits<double>::infinity();
    for (const Point& p : positions) d2 = std::min(d2, dist2(p, q));
    const double d = std::sqrt(d2);
    sum += d;
    sum2 += d * d;
  }
  McEstimate e;
  e.value = sum / n;
  const double var = std::max(0.0, sum2 / n - e.value * e.value);
  e.stderror = std::sqrt(var / n);
  return e;
}

Point generalized_median(const Polygon& cell, const DensityIntegrator& integrator) {
  if (cell.size() < 3) throw ZeroMassCell("generalized_median: degenerate cell");
  std::mt19937_64 rng = make_rng(integrator.seed(), "integrator");
  PointSet kept;
  kept.reserve(static_cast<std::size_t>(integrator.budget()) / 4);
  for (int k = 0; k < integrator.budget(); ++k) {
    const Point q = integrator.density().sample(rng);
    if (point_in_convex_polygon(q, cell)) kept.push_back(q);
  }
  if (kept.empty()) throw ZeroMassCell("generalized_median: no density mass in cell");
  return ft_point(kept, polygon_centroid(cell)).point;
}

double mvt_residual(const std::vector<Point>& positions,
                    const DensityIntegrator& integrator,
                    const Polygon& workspace) {
  std::vector<Point> generators = positions;
  Tessellation tess;
  for (int attempt = 0;; ++attempt) {
    try {
      tess = voronoi_cells(generators, workspace);
      break;
    } catch (const CoincidentGenerators&) {
      if (attempt >= 8) throw;
      // separate coincident pairs deterministically and retry
      std::cerr << "mvt_residual: coincident generators, perturbing by " << kPerturb
                << "\n";
      for (std::size_t i = 0; i < generators.size(); ++i) {
        for (std::size_t j = i + 1; j < generators.size(); ++j) {
          if (dist(generators[i], generators[j]) < kCoincidenceTol) {
            generators[j].x += kPerturb * static_cast<double>(attempt + 1) *
                               static_cast<double>(j + 1);
            generators[j].y += kPerturb;
          }
        }
      }
    }
  }

  double residual = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < generators.size(); ++i) {
    try {
      const Point median = generalized_median(tess.cells[i], integrator);
      residual = std::max(residual, dist(generators[i], median));
      any = true;
    } catch (const ZeroMassCell&) {
      std::cerr << "mvt_residual: cell " << i << " carries no density mass, skipped\n";
    }
  }
  if (!any) throw ZeroMassCell("mvt_residual: every cell is empty of density mass");
  return residual;
}

}  // namespace mvr
