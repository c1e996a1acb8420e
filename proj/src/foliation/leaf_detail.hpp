#pragma once

#include <functional>

#include "bowen/foliation.hpp"

namespace bowen::detail {

using Curve = std::function<Point(double)>;

struct Walk {
  LeafSegment seg;
  std::vector<double> taus;
};

double dot(const Vec3& a, const Vec3& b, int d);
Vec3 scaled(const Vec3& v, double s);
void finish(const DynamicalSystem& sys, LeafSegment& seg);
Vec3 seed_direction(const DynamicalSystem& sys, LeafKind kind);
LeafSegment straight_segment(const DynamicalSystem& sys, LeafKind kind, const Point& x, const Vec3& dir,
                             double radius, double spacing);
// Polyline along curve(τ) with curve(0) the anchor, out to arclength `radius`
// on both sides, consecutive vertices at most `spacing` apart.
Walk walk_curve(const DynamicalSystem& sys, LeafKind kind, const Curve& curve, double radius, double spacing);

// The unstable leaf through `base` as a height graph over u = offset·e in
// base's chart, evaluated by quadratic interpolation of a fine polyline.
class LeafGraph {
 public:
  LeafGraph(const DynamicalSystem& sys, const Point& base, double radius, const FoliationConfig& cfg);
  // Height offset of the leaf above the base-offset (o0, o1); also returns u.
  double height(const Vec3& offset, double* u = nullptr) const;
  // |leaf height − offset height| plus the base component transverse to e.
  double residual(const Point& p) const;
  const Point& base() const { return base_; }
  const Vec3& direction() const { return e_; }
  double radius() const { return radius_; }

 private:
  const DynamicalSystem& sys_;
  Point base_;
  Vec3 e_{};
  double radius_ = 0.0;
  std::vector<double> us_, hs_;
};

}  // namespace bowen::detail
