#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "aggflow/vec.hpp"

namespace aggflow {

// Default tolerance for containment queries; matches the kink tolerance used
// when subdifferentials are assembled.
inline constexpr double kContainTol = 1e-9;

// The convex sets that show up as subdifferentials of the supported kernels:
// a single gradient, a segment of slopes across a kink, or (for the pyramid
// kernel at a double kink) a planar convex polygon. Projection is exact and
// closed-form for each variant.
class ConvexSet {
 public:
  enum class Kind { kSingleton, kSegment, kPolygon };

  static ConvexSet singleton(const Vec& p) {
    ConvexSet s;
    s.kind_ = Kind::kSingleton;
    s.pts_ = {p};
    return s;
  }

  static ConvexSet segment(const Vec& a, const Vec& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("ConvexSet::segment: dimension mismatch");
    ConvexSet s;
    s.kind_ = Kind::kSegment;
    s.pts_ = {a, b};
    return s;
  }

  // Vertices must be counter-clockwise and form a convex polygon in R^2.
  static ConvexSet polygon(std::vector<Vec> vertices) {
    for (const Vec& v : vertices)
      if (v.dim() != 2) throw std::invalid_argument("ConvexSet::polygon: vertices must live in R^2");
    // drop duplicate neighbours (closing duplicate included)
    std::vector<Vec> vs;
    for (const Vec& v : vertices) {
      if (vs.empty() || dist(vs.back(), v) > 1e-12) vs.push_back(v);
    }
    if (vs.size() >= 2 && dist(vs.front(), vs.back()) <= 1e-12) vs.pop_back();
    if (vs.size() < 3) throw std::invalid_argument("ConvexSet::polygon: needs at least 3 distinct vertices");
    double scale = 0.0;
    for (const Vec& v : vs) scale = std::max(scale, norm_sq(v));
    const double tol = 1e-12 * std::max(1.0, scale);
    const int n = static_cast<int>(vs.size());
    bool has_pos = false, has_neg = false;
    for (int k = 0; k < n; ++k) {
      const Vec e1 = vs[(k + 1) % n] - vs[k];
      const Vec e2 = vs[(k + 2) % n] - vs[(k + 1) % n];
      const double c = cross2(e1, e2);
      if (c > tol) has_pos = true;
      if (c < -tol) has_neg = true;
    }
    if (has_pos && has_neg) throw std::invalid_argument("ConvexSet::polygon: vertices are not convex");
    if (has_neg) throw std::invalid_argument("ConvexSet::polygon: vertices must be counter-clockwise");
    if (!has_pos) throw std::invalid_argument("ConvexSet::polygon: degenerate (collinear) vertex set");
    ConvexSet s;
    s.kind_ = Kind::kPolygon;
    s.pts_ = std::move(vs);
    return s;
  }

  Kind kind() const { return kind_; }
  int dim() const { return pts_.front().dim(); }
  const std::vector<Vec>& vertices() const { return pts_; }

  // True when the set is a single point (including a degenerate segment).
  bool is_pointlike() const {
    if (kind_ == Kind::kSingleton) return true;
    if (kind_ == Kind::kSegment) return dist(pts_[0], pts_[1]) <= 1e-15;
    return false;
  }

  Vec project(const Vec& p) const {
    require_dim(p, dim(), "ConvexSet::project");
    switch (kind_) {
      case Kind::kSingleton:
        return pts_[0];
      case Kind::kSegment:
        return project_segment(pts_[0], pts_[1], p);
      case Kind::kPolygon: {
        if (polygon_contains(p)) return p;
        Vec best = project_segment(pts_.back(), pts_.front(), p);
        double bd = norm_sq(best - p);
        const int n = static_cast<int>(pts_.size());
        for (int k = 0; k + 1 < n; ++k) {
          const Vec q = project_segment(pts_[k], pts_[k + 1], p);
          const double d2 = norm_sq(q - p);
          if (d2 < bd) {
            bd = d2;
            best = q;
          }
        }
        return best;
      }
    }
    return pts_[0];  // unreachable
  }

  bool contains(const Vec& p, double tol = kContainTol) const {
    require_dim(p, dim(), "ConvexSet::contains");
    return dist(p, project(p)) <= tol;
  }

  Vec min_norm() const { return project(Vec::zero(dim())); }

 private:
  static double cross2(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

  static Vec project_segment(const Vec& a, const Vec& b, const Vec& p) {
    const Vec ab = b - a;
    const double len2 = norm_sq(ab);
    if (len2 == 0.0) return a;
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return a + t * ab;
  }

  bool polygon_contains(const Vec& p) const {
    const int n = static_cast<int>(pts_.size());
    for (int k = 0; k < n; ++k) {
      const Vec& a = pts_[k];
      const Vec& b = pts_[(k + 1) % n];
      if (cross2(b - a, p - a) < 0.0) return false;
    }
    return true;
  }

  Kind kind_ = Kind::kSingleton;
  std::vector<Vec> pts_;
};

}  // namespace aggflow
