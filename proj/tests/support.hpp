#pragma once

// Test-only helpers: seeded random tensors and small geometric oracles that
// are independent of the library code under test.

#include "star/types.hpp"

#include <algorithm>
#include <random>
#include <utility>
#include <vector>

namespace star::testing {

inline TokenMatrixd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double stddev = 1.0) {
  std::normal_distribution<double> normal(0.0, stddev);
  TokenMatrixd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

inline FrameFeature random_frame(std::mt19937_64& rng, int grid, int dim, double stddev = 1.0) {
  return FrameFeature(grid, random_matrix(rng, static_cast<Eigen::Index>(grid) * grid, dim, stddev));
}

struct Point2 {
  double x;
  double y;
};

inline double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew's monotone chain; counter-clockwise hull without collinear points.
inline std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  if (pts.size() < 3) return pts;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

// Inside or on the boundary of a counter-clockwise convex polygon, with a small
// absolute tolerance for points that sit on an edge.
inline bool inside_convex(const std::vector<Point2>& hull, const Point2& p, double tol = 1e-9) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (cross(a, b, p) < -tol * std::max(1.0, len)) return false;
  }
  return true;
}

}  // namespace star::testing
