#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mvr/geometry.hpp"
#include "mvr/process.hpp"

namespace mvr {

// Index of the position closest to q; ties go to the lowest index.
// Throws std::invalid_argument for an empty position list.
std::size_t nearest_agent(Point q, const std::vector<Point>& positions);

// Whether q belongs to the Voronoi cell of agent i: no other agent is
// strictly closer, and no lower-indexed agent is equally close. Only agents
// inside the circle of radius |p_i - q| about q can matter, so the test is
// a distance comparison, never an explicit cell construction.
bool in_voronoi_cell(std::size_t i, Point q, const std::vector<Point>& positions);

struct Tessellation {
  std::vector<Point> generators;
  std::vector<Polygon> cells;  // convex, counterclockwise, clipped to the workspace
};

struct CoincidentGenerators : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Half-plane-intersection Voronoi cells clipped to a convex workspace.
// Requires distinct generators inside the workspace; throws
// CoincidentGenerators otherwise (callers perturb and retry). The cell areas
// are verified to tile the workspace within 1e-6 relative.
Tessellation voronoi_cells(const std::vector<Point>& positions,
                           const Polygon& workspace);

// Monte Carlo evaluator bound to a density: `budget` draws per evaluation,
// fresh deterministic RNG per call (same integrator, same answer).
class DensityIntegrator {
 public:
  DensityIntegrator(const SpatialDensity* density, int budget, std::uint64_t seed);

  const SpatialDensity& density() const { return *density_; }
  int budget() const { return budget_; }
  std::uint64_t seed() const { return seed_; }

 private:
  const SpatialDensity* density_;
  int budget_;
  std::uint64_t seed_;
};

struct McEstimate {
  double value = 0.0;
  double stderror = 0.0;
};

// E[min_i |p_i - q|] under the integrator's density, with standard error.
McEstimate multimedian_value(const std::vector<Point>& positions,
                             const DensityIntegrator& integrator,
                             const Polygon& workspace);

struct ZeroMassCell : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Geometric median of the density restricted to `cell`: budget draws from
// the density, those inside the cell feed the FT solver. Throws ZeroMassCell
// when no draw lands inside.
Point generalized_median(const Polygon& cell, const DensityIntegrator& integrator);

// max_i |p_i - generalized_median(V_i)|; ~0 exactly when the configuration
// generates a median Voronoi tessellation. Coincident generators are
// perturbed by 1e-9 and retried; zero-mass cells are skipped. Both are
// reported on the diagnostic stream.
double mvt_residual(const std::vector<Point>& positions,
                    const DensityIntegrator& integrator,
                    const Polygon& workspace);

}  // namespace mvr
