#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mvr/geometry.hpp"

namespace mvr {

// Deterministic per-concern RNG: one named stream per purpose (arrivals,
// locations, integrators, ...) so adding a consumer never perturbs the others.
std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream_name);

// Uniform double in the open interval (0, 1).
double canonical_open(std::mt19937_64& rng);

// Normalized raster density: row-major nonnegative weights over a regular
// grid covering [lo, hi]; row 0 sits at lo.y. Weights sum to 1.
struct DensityRaster {
  int rows = 0;
  int cols = 0;
  Point lo;
  Point hi;
  std::vector<double> weights;

  double cell_width() const { return (hi.x - lo.x) / cols; }
  double cell_height() const { return (hi.y - lo.y) / rows; }
  Point cell_center(int r, int c) const {
    return {lo.x + (c + 0.5) * cell_width(), lo.y + (r + 0.5) * cell_height()};
  }
  double weight(int r, int c) const { return weights[static_cast<std::size_t>(r) * cols + c]; }
};

// Plain-text raster file: first line "rows cols x0 y0 x1 y1", then row-major
// nonnegative weights. The loader normalizes. Malformed input throws
// std::runtime_error naming the offending line.
DensityRaster load_density_raster(const std::string& path);
DensityRaster parse_density_raster(std::string_view text);

// Normalized target-location distribution over a bounded convex support.
class SpatialDensity {
 public:
  enum class Kind { uniform, truncated_normal, grid };

  static SpatialDensity uniform(Polygon support);
  static SpatialDensity truncated_normal(Point center, double sigma, Polygon support);
  static SpatialDensity grid(DensityRaster raster);

  Kind kind() const { return kind_; }
  const Polygon& support() const { return support_; }

  // Density value (normalized to integrate to 1 over the support).
  double pdf(Point q) const;

  // One draw. Rejection sampling is capped at 10^6 attempts; hitting the cap
  // means the density is malformed and throws std::runtime_error.
  Point sample(std::mt19937_64& rng) const;

  // Probability mass of the axis-aligned rectangle [lo, hi]. Exact for
  // uniform and grid; for the truncated normal, closed form on rectangular
  // support and adaptive slice quadrature otherwise.
  double mass_rect(Point lo, Point hi) const;

  // Rasterization for deterministic quadrature cross-checks: exact cell
  // masses for uniform and grid kinds, midpoint-rule masses for the normal.
  DensityRaster rasterize(int rows, int cols) const;

  // |integral of pdf over the support - 1|, evaluated by an independent
  // numerical route. Checked at construction against 1e-6.
  double normalization_residual() const;

 private:
  SpatialDensity() = default;
  void finalize_checks();

  Kind kind_ = Kind::uniform;
  Polygon support_;
  BoundingBox support_box_{};
  double support_area_ = 0.0;

  // truncated normal
  Point center_{};
  double sigma_ = 0.0;
  double normal_z_ = 1.0;  // mass of the untruncated normal inside the support
  bool rect_support_ = false;

  // grid
  DensityRaster raster_;
  std::vector<double> cumulative_;
};

// Homogeneous Poisson arrival process paired with i.i.d. locations from a
// spatial density. The event sequence is a function of (rate, seed) alone:
// windowing the queries differently never changes the realized stream.
class ArrivalStream {
 public:
  ArrivalStream(double rate, std::uint64_t seed, const SpatialDensity* density);

  double rate() const { return rate_; }
  double cursor() const { return cursor_; }

  // Events in [t0, t1), strictly increasing timestamps. Requires
  // cursor <= t0 < t1; events falling in a skipped gap [cursor, t0) are
  // consumed and discarded.
  std::vector<std::pair<double, Point>> sample_arrivals(double t0, double t1);

 private:
  void advance();

  double rate_ = 0.0;
  double cursor_ = 0.0;
  double next_time_ = 0.0;
  const SpatialDensity* density_ = nullptr;
  std::mt19937_64 time_rng_;
  std::mt19937_64 location_rng_;
};

}  // namespace mvr
