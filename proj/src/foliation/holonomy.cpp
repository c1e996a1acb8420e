#include <algorithm>
#include <cmath>

#include "bowen/foliation.hpp"
#include "leaf_detail.hpp"

namespace bowen {

namespace detail {

LeafGraph::LeafGraph(const DynamicalSystem& sys, const Point& base, double radius, const FoliationConfig& cfg)
    : sys_(sys), base_(base), e_(seed_direction(sys, LeafKind::Unstable)), radius_(radius) {
  FoliationConfig fine = cfg;
  fine.gt_tol = cfg.holonomy_tol;
  const LeafSegment seg = unstable_segment(sys, base, radius, radius / 64.0, fine);
  for (const auto& p : seg.points) {
    const Vec3 o = sys.chart_offset(base, p);
    us_.push_back(dot(o, e_, 2));
    hs_.push_back(o[2]);
  }
  if (us_.size() > 1 && us_.front() > us_.back()) {
    std::reverse(us_.begin(), us_.end());
    std::reverse(hs_.begin(), hs_.end());
  }
}

double LeafGraph::height(const Vec3& o, double* u_out) const {
  const double u = dot(o, e_, 2);
  if (u_out) *u_out = u;
  if (us_.size() == 1) return hs_[0];
  if (us_.size() == 2) {
    const double t = (u - us_[0]) / (us_[1] - us_[0]);
    return hs_[0] + t * (hs_[1] - hs_[0]);
  }
  auto it = std::lower_bound(us_.begin(), us_.end(), u);
  std::size_t i = static_cast<std::size_t>(std::distance(us_.begin(), it));
  i = std::clamp<std::size_t>(i, 1, us_.size() - 2);
  const double x0 = us_[i - 1], x1 = us_[i], x2 = us_[i + 1];
  const double l0 = (u - x1) * (u - x2) / ((x0 - x1) * (x0 - x2));
  const double l1 = (u - x0) * (u - x2) / ((x1 - x0) * (x1 - x2));
  const double l2 = (u - x0) * (u - x1) / ((x2 - x0) * (x2 - x1));
  return l0 * hs_[i - 1] + l1 * hs_[i] + l2 * hs_[i + 1];
}

double LeafGraph::residual(const Point& p) const {
  const Vec3 o = sys_.chart_offset(base_, p);
  double u = 0.0;
  const double h = height(o, &u);
  const double t0 = o[0] - u * e_[0], t1 = o[1] - u * e_[1];
  return std::abs(h - o[2]) + std::hypot(t0, t1);
}

}  // namespace detail

namespace {

void require_center(const DynamicalSystem& sys) {
  const auto tr = sys.traits();
  if (!tr.suspension || !tr.center_preserving)
    throw InputError("center holonomy needs a time-t map or a center-preserving perturbation");
}

}  // namespace

HolonomyResult center_holonomy(const DynamicalSystem& sys, const Point& x0, const Point& y0,
                               const std::vector<Point>& u_points, int depth, const FoliationConfig& cfg) {
  require_center(sys);
  if (depth < 1) throw InputError("holonomy depth must be >= 1");
  const auto& flow = *sys.traits().suspension;
  const Point x = sys.canonical(x0);
  const Point y = sys.canonical(y0);
  const double c = center_offset(sys, x, y, 1e-8);

  HolonomyResult res;
  res.depth = depth;
  if (u_points.empty()) return res;

  const auto n = static_cast<std::size_t>(depth);
  std::vector<Point> xs{x}, ys{y};
  std::vector<double> cs{c};
  for (std::size_t j = 1; j <= n; ++j) {
    xs.push_back(sys.eval_inverse(xs.back()));
    ys.push_back(sys.eval_inverse(ys.back()));
    cs.push_back(cs.back() - sys.center_time(ys.back()) + sys.center_time(xs.back()));
  }

  std::vector<std::vector<Point>> zs(u_points.size());
  for (std::size_t i = 0; i < u_points.size(); ++i) {
    zs[i].push_back(sys.canonical(u_points[i]));
    for (std::size_t j = 1; j <= n; ++j) zs[i].push_back(sys.eval_inverse(zs[i].back()));
    res.pullback_radius = std::max(res.pullback_radius, sys.distance(zs[i][n], xs[n]));
  }
  if (res.pullback_radius > cfg.chart_radius)
    throw ChartError("pulled-back points lie outside the local chart (radius " +
                     std::to_string(res.pullback_radius) + " > " + std::to_string(cfg.chart_radius) +
                     "); increase the holonomy depth");

  const Point& yn = ys[n];
  std::vector<Point> moved(u_points.size());
  double reach = 0.0;
  const Vec3 e = detail::seed_direction(sys, LeafKind::Unstable);
  for (std::size_t i = 0; i < u_points.size(); ++i) {
    moved[i] = flow.flow(zs[i][n], cs[n]);
    reach = std::max(reach, std::abs(detail::dot(sys.chart_offset(yn, moved[i]), e, 2)));
  }
  if (reach > cfg.chart_radius)
    throw ChartError("local holonomy target outside the chart; increase the holonomy depth");

  const double radius = std::max(1.25 * reach, 1e-9);
  const detail::LeafGraph leaf(sys, yn, radius, cfg);

  for (std::size_t i = 0; i < u_points.size(); ++i) {
    Vec3 o = sys.chart_offset(yn, moved[i]);
    const double h = leaf.height(o);
    double off = cs[n] + (h - o[2]);
    o[2] = h;
    Point img = sys.chart_point(yn, o);
    for (std::size_t j = n; j >= 1; --j) {
      off += sys.center_time(img) - sys.center_time(zs[i][j]);
      img = sys.eval(img);
    }
    res.images.push_back(img);
    res.center_offsets.push_back(off);
  }
  return res;
}

std::vector<HolonomyBounds> holonomy_bounds(const DynamicalSystem& sys, const Point& x, const Point& y,
                                            const std::vector<double>& radii, int depth,
                                            const FoliationConfig& cfg) {
  std::vector<HolonomyBounds> out;
  for (double r : radii) {
    if (!(r > 0.0)) throw InputError("holonomy_bounds: radii must be > 0");
    const LeafSegment seg = unstable_segment(sys, x, r, r / 10.0, cfg);
    const HolonomyResult h = center_holonomy(sys, x, y, seg.points, depth, cfg);
    HolonomyBounds b;
    b.radius = r;
    const int d = sys.dimension();
    b.c1 = std::min(norm(sys.chart_offset(y, h.images.front()), d), norm(sys.chart_offset(y, h.images.back()), d));
    for (const auto& p : h.images) b.c2 = std::max(b.c2, norm(sys.chart_offset(y, p), d));
    out.push_back(b);
  }
  return out;
}

}  // namespace bowen
