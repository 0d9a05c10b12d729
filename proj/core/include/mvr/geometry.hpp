#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mvr {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline Point operator*(Point p, double s) { return {s * p.x, s * p.y}; }
inline bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }
inline bool operator!=(Point a, Point b) { return !(a == b); }

double dot(Point a, Point b);
double cross(Point a, Point b);
double norm(Point v);
double norm2(Point v);
double dist(Point a, Point b);
double dist2(Point a, Point b);

// v/|v| for v != 0, the zero vector otherwise.
Point vers(Point v);

bool is_finite(Point p);

// Ordered list of points; insertion order is visit order, duplicates allowed.
using PointSet = std::vector<Point>;

// Sum of Euclidean distances from p to every member of `points`
// (0 for an empty set).
double weber_value(Point p, const PointSet& points);

struct AbsorbingResult {
  bool holds = false;
  double magnitude = 0.0;  // |sum of unit vectors from q0 to the other members|
};

// Tests whether q0, a member of `points`, already minimizes the Weber sum:
// magnitude = |sum_{q != q0} vers(q0 - q)| with exactly one copy of q0
// excluded; holds when magnitude <= 1 (+ small tolerance).
// Throws std::invalid_argument when q0 is not a member of `points`.
AbsorbingResult absorbing_check(Point q0, const PointSet& points);

struct FtResult {
  Point point;
  int iterations = 0;
  // First-order stationarity gap: the norm of the unit-vector sum at
  // `point` when `point` is not a member of the input set; at a member,
  // the same norm reduced by the member's multiplicity (floored at 0).
  double residual = 0.0;
  // True exactly when `point` is bitwise equal to a member of the input set.
  bool anchored = false;
};

// Minimizer of the Weber sum over `points` (the Fermat-Torricelli point).
//   - empty set: returns tie_anchor unchanged (an agent with no history
//     holds its position);
//   - collinear set with a segment of minimizers: returns the point of the
//     minimizing segment nearest to tie_anchor;
//   - otherwise: damped Weiszfeld iteration warm-started at tie_anchor,
//     with displacement restarts when an iterate lands on a data point.
// Optionally records accepted iterates into *trace.
FtResult ft_point(const PointSet& points, Point tie_anchor,
                  std::vector<Point>* trace = nullptr);

// Membership in the solution set C = {p : |sum_q vers(p - q)| <= 1 + tol}.
// Members of `points` coincident with p contribute the zero vector.
// Throws std::invalid_argument for an empty set.
bool solution_set_contains(Point p, const PointSet& points, double tol = 0.0);

// Monte Carlo estimate of diam(C): probes are sampled in the bounding box of
// `points` inflated on each side by the bounding-box diagonal (floored at 1
// for degenerate boxes, which makes the singleton case return the inflated
// box scale); kept probes plus the FT point are scanned pairwise.
// Convergence diagnostic only. Requires nonempty `points`, probe_count >= 2.
double solution_set_diameter_estimate(const PointSet& points, int probe_count,
                                      std::uint64_t seed);

// Diameter upper bound: the bounding-box diagonal (within sqrt(2) of the
// true diameter).
double bounding_diameter(const PointSet& points);

struct BoundingBox {
  Point lo;
  Point hi;
};
BoundingBox bounding_box(const PointSet& points);

// ---------------------------------------------------------------------------
// Convex polygons (counterclockwise vertex lists)

using Polygon = std::vector<Point>;

Polygon make_rect(Point lo, Point hi);
double polygon_area(const Polygon& poly);
Point polygon_centroid(const Polygon& poly);
BoundingBox polygon_bounds(const Polygon& poly);

// Convex membership with a slack band of width tol around the boundary.
bool point_in_convex_polygon(Point q, const Polygon& poly, double tol = 1e-12);

// Clips a convex polygon against the half-plane {q : dot(q - a, n) <= 0}.
Polygon clip_halfplane(const Polygon& poly, Point a, Point n);

}  // namespace mvr
