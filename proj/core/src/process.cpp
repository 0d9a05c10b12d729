#include "mvr/process.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mvr {

namespace {

constexpr int kRejectionCap = 1000000;
constexpr double kNormalizationTol = 1e-6;

double normal_cdf(double z) { return 0.5 * (1.0 + std::erf(z / std::numbers::sqrt2)); }

double normal_pdf_1d(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// Vertical slice of a convex polygon: the y-interval at abscissa x.
bool polygon_slice(const Polygon& poly, double x, double* ylo, double* yhi) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = poly[i];
    const Point b = poly[(i + 1) % n];
    if (a.x == b.x) {
      if (a.x == x) {
        lo = std::min({lo, a.y, b.y});
        hi = std::max({hi, a.y, b.y});
      }
      continue;
    }
    if ((a.x - x) * (b.x - x) <= 0.0) {
      const double y = a.y + (x - a.x) * (b.y - a.y) / (b.x - a.x);
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
  }
  if (lo > hi) return false;
  *ylo = lo;
  *yhi = hi;
  return true;
}

// Mass of the untruncated normal N(center, sigma^2 I) inside a convex
// polygon: Simpson quadrature in x of the closed-form y-slice integral,
// with panels split at vertex abscissae where the slice bounds kink.
double normal_mass_polygon(const Polygon& poly, Point center, double sigma,
                           int panels_per_segment) {
  std::vector<double> xs;
  xs.reserve(poly.size());
  for (const Point& p : poly) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (xs.size() < 2) return 0.0;

  auto slice_value = [&](double x) {
    double ylo, yhi;
    if (!polygon_slice(poly, x, &ylo, &yhi)) return 0.0;
    const double fy = normal_cdf((yhi - center.y) / sigma) -
                      normal_cdf((ylo - center.y) / sigma);
    return normal_pdf_1d(x, center.x, sigma) * fy;
  };

  double total = 0.0;
  for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
    const double a = xs[s];
    const double b = xs[s + 1];
    if (b <= a) continue;
    const int n = panels_per_segment;  // even
    const double h = (b - a) / n;
    double acc = slice_value(a) + slice_value(b);
    for (int i = 1; i < n; ++i) {
      acc += slice_value(a + i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
    }
    total += acc * h / 3.0;
  }
  return total;
}

bool is_axis_rect(const Polygon& poly) {
  if (poly.size() != 4) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point a = poly[i];
    const Point b = poly[(i + 1) % 4];
    if (a.x != b.x && a.y != b.y) return false;
  }
  return true;
}

Polygon clip_to_rect(const Polygon& poly, Point lo, Point hi) {
  Polygon out = poly;
  out = clip_halfplane(out, lo, {-1.0, 0.0});
  out = clip_halfplane(out, hi, {1.0, 0.0});
  out = clip_halfplane(out, lo, {0.0, -1.0});
  out = clip_halfplane(out, hi, {0.0, 1.0});
  return out;
}

double overlap_1d(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

}  // namespace

std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream_name) {
  const std::uint64_t h = std::hash<std::string_view>{}(stream_name);
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h),
                    static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

double canonical_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

DensityRaster parse_density_raster(std::string_view text) {
  std::istringstream in{std::string(text)};
  DensityRaster r;
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error("density raster: empty input (line 1)");
  }
  {
    std::istringstream hs(header);
    if (!(hs >> r.rows >> r.cols >> r.lo.x >> r.lo.y >> r.hi.x >> r.hi.y)) {
      throw std::runtime_error("density raster: malformed header (line 1), expected 'rows cols x0 y0 x1 y1'");
    }
  }
  if (r.rows <= 0 || r.cols <= 0 || r.hi.x <= r.lo.x || r.hi.y <= r.lo.y) {
    throw std::runtime_error("density raster: non-positive dimensions (line 1)");
  }
  const std::size_t expected = static_cast<std::size_t>(r.rows) * r.cols;
  r.weights.reserve(expected);
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    double w;
    while (ls >> w) {
      if (w < 0.0 || !std::isfinite(w)) {
        throw std::runtime_error("density raster: negative or non-finite weight (line " +
                                 std::to_string(line_no) + ")");
      }
      r.weights.push_back(w);
    }
    if (!ls.eof()) {
      throw std::runtime_error("density raster: non-numeric token (line " +
                               std::to_string(line_no) + ")");
    }
  }
  if (r.weights.size() != expected) {
    throw std::runtime_error("density raster: expected " + std::to_string(expected) +
                             " weights, got " + std::to_string(r.weights.size()));
  }
  double total = 0.0;
  for (double w : r.weights) total += w;
  if (total <= 0.0) {
    throw std::runtime_error("density raster: all weights are zero");
  }
  for (double& w : r.weights) w /= total;
  return r;
}

DensityRaster load_density_raster(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("density raster: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_density_raster(buf.str());
}

// ---------------------------------------------------------------------------
// SpatialDensity

SpatialDensity SpatialDensity::uniform(Polygon support) {
  SpatialDensity d;
  d.kind_ = Kind::uniform;
  d.support_ = std::move(support);
  d.finalize_checks();
  return d;
}

SpatialDensity SpatialDensity::truncated_normal(Point center, double sigma,
                                                Polygon support) {
  if (sigma <= 0.0) throw std::invalid_argument("truncated_normal: sigma must be positive");
  SpatialDensity d;
  d.kind_ = Kind::truncated_normal;
  d.support_ = std::move(support);
  d.center_ = center;
  d.sigma_ = sigma;
  d.rect_support_ = is_axis_rect(d.support_);
  if (d.rect_support_) {
    const BoundingBox b = polygon_bounds(d.support_);
    d.normal_z_ = (normal_cdf((b.hi.x - center.x) / sigma) -
                   normal_cdf((b.lo.x - center.x) / sigma)) *
                  (normal_cdf((b.hi.y - center.y) / sigma) -
                   normal_cdf((b.lo.y - center.y) / sigma));
  } else {
    d.normal_z_ = normal_mass_polygon(d.support_, center, sigma, 512);
  }
  if (d.normal_z_ <= 0.0) {
    throw std::runtime_error("truncated_normal: support carries no normal mass");
  }
  d.finalize_checks();
  return d;
}

SpatialDensity SpatialDensity::grid(DensityRaster raster) {
  SpatialDensity d;
  d.kind_ = Kind::grid;
  d.support_ = make_rect(raster.lo, raster.hi);
  d.raster_ = std::move(raster);
  d.cumulative_.resize(d.raster_.weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < d.raster_.weights.size(); ++i) {
    acc += d.raster_.weights[i];
    d.cumulative_[i] = acc;
  }
  d.finalize_checks();
  return d;
}

void SpatialDensity::finalize_checks() {
  if (support_.size() < 3) throw std::invalid_argument("density support: need a polygon");
  support_area_ = polygon_area(support_);
  if (support_area_ <= 0.0) {
    throw std::invalid_argument("density support: polygon must be counterclockwise with positive area");
  }
  support_box_ = polygon_bounds(support_);
  const double residual = normalization_residual();
  if (residual > kNormalizationTol) {
    throw std::runtime_error("density normalization check failed: residual " +
                             std::to_string(residual));
  }
}

double SpatialDensity::pdf(Point q) const {
  switch (kind_) {
    case Kind::uniform:
      return point_in_convex_polygon(q, support_) ? 1.0 / support_area_ : 0.0;
    case Kind::truncated_normal: {
      if (!point_in_convex_polygon(q, support_)) return 0.0;
      return normal_pdf_1d(q.x, center_.x, sigma_) *
             normal_pdf_1d(q.y, center_.y, sigma_) / normal_z_;
    }
    case Kind::grid: {
      if (q.x < raster_.lo.x || q.x >= raster_.hi.x || q.y < raster_.lo.y ||
          q.y >= raster_.hi.y) {
        return 0.0;
      }
      const int c = std::min(raster_.cols - 1,
                             static_cast<int>((q.x - raster_.lo.x) / raster_.cell_width()));
      const int r = std::min(raster_.rows - 1,
                             static_cast<int>((q.y - raster_.lo.y) / raster_.cell_height()));
      return raster_.weight(r, c) / (raster_.cell_width() * raster_.cell_height());
    }
  }
  return 0.0;
}

Point SpatialDensity::sample(std::mt19937_64& rng) const {
  switch (kind_) {
    case Kind::uniform: {
      for (int i = 0; i < kRejectionCap; ++i) {
        const Point q{support_box_.lo.x + canonical_open(rng) * (support_box_.hi.x - support_box_.lo.x),
                      support_box_.lo.y + canonical_open(rng) * (support_box_.hi.y - support_box_.lo.y)};
        if (point_in_convex_polygon(q, support_)) return q;
      }
      break;
    }
    case Kind::truncated_normal: {
      for (int i = 0; i < kRejectionCap; ++i) {
        const double u1 = canonical_open(rng);
        const double u2 = canonical_open(rng);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const Point q{center_.x + sigma_ * radius * std::cos(2.0 * std::numbers::pi * u2),
                      center_.y + sigma_ * radius * std::sin(2.0 * std::numbers::pi * u2)};
        if (point_in_convex_polygon(q, support_)) return q;
      }
      break;
    }
    case Kind::grid: {
      const double u = canonical_open(rng) * cumulative_.back();
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
      if (idx >= raster_.weights.size()) idx = raster_.weights.size() - 1;
      const int r = static_cast<int>(idx) / raster_.cols;
      const int c = static_cast<int>(idx) % raster_.cols;
      return {raster_.lo.x + (c + canonical_open(rng)) * raster_.cell_width(),
              raster_.lo.y + (r + canonical_open(rng)) * raster_.cell_height()};
    }
  }
  throw std::runtime_error("SpatialDensity::sample: rejection cap exhausted (malformed density)");
}

double SpatialDensity::mass_rect(Point lo, Point hi) const {
  switch (kind_) {
    case Kind::uniform: {
      const Polygon clipped = clip_to_rect(support_, lo, hi);
      if (clipped.size() < 3) return 0.0;
      return polygon_area(clipped) / support_area_;
    }
    case Kind::truncated_normal: {
      if (rect_support_) {
        const double x0 = std::max(lo.x, support_box_.lo.x);
        const double x1 = std::min(hi.x, support_box_.hi.x);
        const double y0 = std::max(lo.y, support_box_.lo.y);
        const double y1 = std::min(hi.y, support_box_.hi.y);
        if (x0 >= x1 || y0 >= y1) return 0.0;
        return (normal_cdf((x1 - center_.x) / sigma_) - normal_cdf((x0 - center_.x) / sigma_)) *
               (normal_cdf((y1 - center_.y) / sigma_) - normal_cdf((y0 - center_.y) / sigma_)) /
               normal_z_;
      }
      const Polygon clipped = clip_to_rect(support_, lo, hi);
      if (clipped.size() < 3) return 0.0;
      return normal_mass_polygon(clipped, center_, sigma_, 256) / normal_z_;
    }
    case Kind::grid: {
      double mass = 0.0;
      const double cw = raster_.cell_width();
      const double ch = raster_.cell_height();
      for (int r = 0; r < raster_.rows; ++r) {
        const double cy0 = raster_.lo.y + r * ch;
        const double oy = overlap_1d(cy0, cy0 + ch, lo.y, hi.y);
        if (oy == 0.0) continue;
        for (int c = 0; c < raster_.cols; ++c) {
          const double cx0 = raster_.lo.x + c * cw;
          const double ox = overlap_1d(cx0, cx0 + cw, lo.x, hi.x);
          if (ox == 0.0) continue;
          mass += raster_.weight(r, c) * (ox * oy) / (cw * ch);
        }
      }
      return mass;
    }
  }
  return 0.0;
}

DensityRaster SpatialDensity::rasterize(int rows, int cols) const {
  DensityRaster out;
  out.rows = rows;
  out.cols = cols;
  out.lo = support_box_.lo;
  out.hi = support_box_.hi;
  out.weights.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  const double cw = out.cell_width();
  const double ch = out.cell_height();
  double total = 0.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const Point lo{out.lo.x + c * cw, out.lo.y + r * ch};
      const Point hi{lo.x + cw, lo.y + ch};
      double w;
      if (kind_ == Kind::truncated_normal) {
        // midpoint rule; cheap and second-order accurate in the cell size
        w = pdf({0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)}) * cw * ch;
      } else {
        w = mass_rect(lo, hi);
      }
      out.weights[static_cast<std::size_t>(r) * cols + c] = w;
      total += w;
    }
  }
  if (total <= 0.0) throw std::runtime_error("rasterize: support carries no mass");
  for (double& w : out.weights) w /= total;
  return out;
}

double SpatialDensity::normalization_residual() const {
  switch (kind_) {
    case Kind::uniform:
      return 0.0;  // pdf is 1/area by construction
    case Kind::truncated_normal: {
      // independent route: re-integrate at a different quadrature resolution
      const double alt = normal_mass_polygon(support_, center_, sigma_, 768);
      return std::abs(alt / normal_z_ - 1.0);
    }
    case Kind::grid: {
      double total = 0.0;
      for (double w : raster_.weights) total += w;
      return std::abs(total - 1.0);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// ArrivalStream

ArrivalStream::ArrivalStream(double rate, std::uint64_t seed,
                             const SpatialDensity* density)
    : rate_(rate),
      density_(density),
      time_rng_(make_rng(seed, "arrivals")),
      location_rng_(make_rng(seed, "locations")) {
  if (rate < 0.0) throw std::invalid_argument("ArrivalStream: negative rate");
  if (density == nullptr) throw std::invalid_argument("ArrivalStream: null density");
  next_time_ = 0.0;
  advance();
}

void ArrivalStream::advance() {
  if (rate_ == 0.0) {
    next_time_ = std::numeric_limits<double>::infinity();
    return;
  }
  const double u = canonical_open(time_rng_);
  next_time_ += -std::log1p(-u) / rate_;
}

std::vector<std::pair<double, Point>> ArrivalStream::sample_arrivals(double t0,
                                                                     double t1) {
  if (!(t0 < t1)) throw std::invalid_argument("sample_arrivals: need t0 < t1");
  if (t0 < cursor_) throw std::invalid_argument("sample_arrivals: window behind cursor");
  while (next_time_ < t0) {
    (void)density_->sample(location_rng_);  // keep streams aligned across skips
    advance();
  }
  std::vector<std::pair<double, Point>> events;
  while (next_time_ < t1) {
    events.emplace_back(next_time_, density_->sample(location_rng_));
    advance();
  }
  cursor_ = t1;
  return events;
}

}  // namespace mvr
