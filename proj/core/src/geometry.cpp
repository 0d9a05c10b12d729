#include "mvr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mvr {

namespace {

constexpr double kAnchorTol = 1e-9;        // slack on the absorbing threshold
constexpr double kDatumSnap = 1e-12;       // iterate-on-datum detection radius
constexpr double kDatumDisplace = 1e-8;    // restart displacement off a datum
constexpr double kStepTolScale = 1e-9;     // relative step termination
constexpr double kCollinearScale = 1e-12;  // cross-product band, scaled by diam^2
constexpr int kMaxIterations = 10000;

// Unit-vector sum over members not coincident with y, plus the exact-copy
// count of y itself. Coincident members contribute the zero vector.
struct UnitSum {
  Point sum{};
  int multiplicity = 0;
};

UnitSum unit_vector_sum(Point y, const PointSet& points) {
  UnitSum r;
  for (const Point& q : points) {
    if (q == y) {
      ++r.multiplicity;
      continue;
    }
    r.sum = r.sum + vers(y - q);
  }
  return r;
}

double stationarity_gap(Point y, const PointSet& points) {
  UnitSum s = unit_vector_sum(y, points);
  return std::max(0.0, norm(s.sum) - static_cast<double>(s.multiplicity));
}

// Collinearity: every point lies within a cross-product band around the
// longest chord from points[0]. Equivalent to the all-pairs criterion up to
// a constant, and O(n).
bool all_collinear(const PointSet& points, Point origin, Point chord,
                   double diam) {
  const double band = kCollinearScale * diam * diam;
  for (const Point& q : points) {
    if (std::abs(cross(chord, q - origin)) > band) return false;
  }
  return true;
}

// Minimizer over an (even or odd) collinear set: the median order statistic,
// or the projection of the anchor onto the middle segment.
FtResult collinear_minimizer(const PointSet& points, Point anchor,
                             Point origin, Point chord) {
  const std::size_t n = points.size();
  const Point u = vers(chord);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = dot(points[i] - origin, u);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });

  FtResult r;
  if (n % 2 == 1) {
    r.point = points[order[n / 2]];
    r.anchored = true;
  } else {
    const std::size_t lo = order[n / 2 - 1];
    const std::size_t hi = order[n / 2];
    const double ta = std::clamp(dot(anchor - origin, u), t[lo], t[hi]);
    if (ta == t[lo]) {
      r.point = points[lo];  // snap to the datum, not its reprojection
    } else if (ta == t[hi]) {
      r.point = points[hi];
    } else {
      r.point = origin + ta * u;
    }
    r.anchored = std::any_of(points.begin(), points.end(),
                             [&](const Point& q) { return q == r.point; });
  }
  r.residual = stationarity_gap(r.point, points);
  return r;
}

}  // namespace

double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point v) { return std::hypot(v.x, v.y); }
double norm2(Point v) { return v.x * v.x + v.y * v.y; }
double dist(Point a, Point b) { return norm(a - b); }
double dist2(Point a, Point b) { return norm2(a - b); }

Point vers(Point v) {
  const double n = norm(v);
  if (n == 0.0) return {0.0, 0.0};
  return {v.x / n, v.y / n};
}

bool is_finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

double weber_value(Point p, const PointSet& points) {
  double sum = 0.0;
  for (const Point& q : points) sum += dist(p, q);
  return sum;
}

AbsorbingResult absorbing_check(Point q0, const PointSet& points) {
  bool member = false;
  Point sum{};
  for (const Point& q : points) {
    if (!member && q == q0) {
      member = true;  // exclude exactly one copy
      continue;
    }
    sum = sum + vers(q0 - q);
  }
  if (!member) {
    throw std::invalid_argument("absorbing_check: q0 is not a member of the point set");
  }
  AbsorbingResult r;
  r.magnitude = norm(sum);
  r.holds = r.magnitude <= 1.0 + kAnchorTol;
  return r;
}

BoundingBox bounding_box(const PointSet& points) {
  BoundingBox b{{std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity()},
                {-std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()}};
  for (const Point& p : points) {
    b.lo.x = std::min(b.lo.x, p.x);
    b.lo.y = std::min(b.lo.y, p.y);
    b.hi.x = std::max(b.hi.x, p.x);
    b.hi.y = std::max(b.hi.y, p.y);
  }
  return b;
}

double bounding_diameter(const PointSet& points) {
  if (points.empty()) return 0.0;
  const BoundingBox b = bounding_box(points);
  return dist(b.lo, b.hi);
}

FtResult ft_point(const PointSet& points, Point tie_anchor,
                  std::vector<Point>* trace) {
  FtResult r;
  if (points.empty()) {
    r.point = tie_anchor;
    return r;
  }
  if (points.size() == 1) {
    r.point = points.front();
    r.anchored = true;
    return r;
  }

  const double diam = bounding_diameter(points);
  if (diam == 0.0) {  // all copies of one location
    r.point = points.front();
    r.anchored = true;
    return r;
  }

  // Longest chord from points[0] anchors the collinearity test.
  Point origin = points.front();
  Point far = origin;
  double best = 0.0;
  for (const Point& q : points) {
    const double d = dist2(origin, q);
    if (d > best) {
      best = d;
      far = q;
    }
  }
  if (all_collinear(points, origin, far - origin, diam)) {
    return collinear_minimizer(points, tie_anchor, origin, far - origin);
  }

  const double step_tol = kStepTolScale * (1.0 + diam);
  Point y = tie_anchor;
  if (trace) trace->push_back(y);
  int iter = 0;
  while (iter < kMaxIterations) {
    ++iter;
    // Datum handling: Weiszfeld is undefined on a data point. If the hit
    // datum passes the (multiplicity-aware) absorbing condition it is the
    // minimizer; otherwise restart displaced along the descent direction.
    const Point* datum = nullptr;
    for (const Point& q : points) {
      if (dist(y, q) <= kDatumSnap) {
        datum = &q;
        break;
      }
    }
    if (datum) {
      const UnitSum s = unit_vector_sum(*datum, points);
      const double rn = norm(s.sum);
      if (rn <= static_cast<double>(s.multiplicity) + kAnchorTol) {
        r.point = *datum;
        r.iterations = iter;
        r.residual = std::max(0.0, rn - static_cast<double>(s.multiplicity));
        r.anchored = true;
        return r;
      }
      y = *datum - (kDatumDisplace / rn) * s.sum;
      if (trace) trace->push_back(y);
      continue;
    }

    Point weighted{};
    double total = 0.0;
    for (const Point& q : points) {
      const double w = 1.0 / dist(y, q);
      weighted = weighted + w * q;
      total += w;
    }
    const Point next = (1.0 / total) * weighted;
    const double step = dist(next, y);
    y = next;
    if (trace) trace->push_back(y);
    if (step <= step_tol) break;
  }

  r.point = y;
  r.iterations = iter;
  r.residual = stationarity_gap(y, points);
  r.anchored = std::any_of(points.begin(), points.end(),
                           [&](const Point& q) { return q == y; });
  return r;
}

bool solution_set_contains(Point p, const PointSet& points, double tol) {
  if (points.empty()) {
    throw std::invalid_argument("solution_set_contains: empty point set");
  }
  const UnitSum s = unit_vector_sum(p, points);
  return norm(s.sum) <= 1.0 + tol;
}

double solution_set_diameter_estimate(const PointSet& points, int probe_count,
                                      std::uint64_t seed) {
  if (points.empty()) {
    throw std::invalid_argument("solution_set_diameter_estimate: empty point set");
  }
  if (probe_count < 2) {
    throw std::invalid_argument("solution_set_diameter_estimate: probe_count < 2");
  }
  BoundingBox box = bounding_box(points);
  const double inflate = std::max(dist(box.lo, box.hi), 1.0);
  box.lo = box.lo - Point{inflate, inflate};
  box.hi = box.hi + Point{inflate, inflate};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x);
  std::uniform_real_distribution<double> uy(box.lo.y, box.hi.y);

  PointSet kept;
  kept.push_back(ft_point(points, 0.5 * (box.lo + box.hi)).point);
  for (int i = 0; i < probe_count; ++i) {
    const Point p{ux(rng), uy(rng)};
    if (solution_set_contains(p, points)) kept.push_back(p);
  }
  double diam2 = 0.0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = i + 1; j < kept.size(); ++j) {
      diam2 = std::max(diam2, dist2(kept[i], kept[j]));
    }
  }
  return std::sqrt(diam2);
}

// ---------------------------------------------------------------------------

Polygon make_rect(Point lo, Point hi) {
  return {{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}};
}

double polygon_area(const Polygon& poly) {
  double twice = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    twice += cross(poly[i], poly[(i + 1) % n]);
  }
  return 0.5 * twice;
}

Point polygon_centroid(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n == 0) return {};
  double twice = 0.0;
  Point c{};
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = poly[i];
    const Point b = poly[(i + 1) % n];
    const double w = cross(a, b);
    twice += w;
    c = c + w * (a + b);
  }
  if (twice == 0.0) {  // degenerate: average the vertices
    for (const Point& p : poly) c = c + p;
    return (1.0 / static_cast<double>(n)) * c;
  }
  return (1.0 / (3.0 * twice)) * c;
}

BoundingBox polygon_bounds(const Polygon& poly) { return bounding_box(poly); }

bool point_in_convex_polygon(Point q, const Polygon& poly, double tol) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = poly[i];
    const Point b = poly[(i + 1) % n];
    const Point edge = b - a;
    // CCW polygon: interior is to the left of every edge.
    if (cross(edge, q - a) < -tol * norm(edge)) return false;
  }
  return true;
}

Polygon clip_halfplane(const Polygon& poly, Point a, Point n) {
  Polygon out;
  const std::size_t m = poly.size();
  if (m == 0) return out;
  out.reserve(m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    const Point cur = poly[i];
    const Point nxt = poly[(i + 1) % m];
    const double dc = dot(cur - a, n);
    const double dn = dot(nxt - a, n);
    if (dc <= 0.0) out.push_back(cur);
    if ((dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0)) {
      const double t = dc / (dc - dn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

}  // namespace mvr
