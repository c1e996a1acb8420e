#include <algorithm>
#include <cmath>
#include <sstream>

#include "bowen/foliation.hpp"
#include "bowen/format.hpp"
#include "leaf_detail.hpp"

namespace bowen {

std::string to_string(LeafKind kind) {
  switch (kind) {
    case LeafKind::Unstable:
      return "unstable";
    case LeafKind::Stable:
      return "stable";
    case LeafKind::Center:
      return "center";
  }
  return "unknown";
}

std::string LeafSegment::to_csv() const {
  std::ostringstream os;
  const int d = points.empty() ? 0 : points.front().dim;
  os << "arc";
  for (int i = 0; i < d; ++i) os << ",x" << i;
  os << "\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    os << format_double(arc[k]);
    for (int i = 0; i < d; ++i) os << "," << format_double(points[k][i]);
    os << "\n";
  }
  return os.str();
}

namespace detail {

double dot(const Vec3& a, const Vec3& b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
  return s;
}

Vec3 scaled(const Vec3& v, double s) { return {v[0] * s, v[1] * s, v[2] * s}; }

void finish(const DynamicalSystem& sys, LeafSegment& seg) {
  seg.arc.assign(seg.points.size(), 0.0);
  seg.spacing_bound = 0.0;
  for (std::size_t i = 1; i < seg.points.size(); ++i) {
    const double d = sys.distance(seg.points[i - 1], seg.points[i]);
    seg.arc[i] = seg.arc[i - 1] + d;
    seg.spacing_bound = std::max(seg.spacing_bound, d);
  }
}

Vec3 seed_direction(const DynamicalSystem& sys, LeafKind kind) {
  const auto tr = sys.traits();
  if (!tr.linear) throw InputError(to_string(sys.kind()) + " system has no certified splitting for leaf segments");
  const Vec3& v = kind == LeafKind::Unstable ? tr.linear->unstable_direction() : tr.linear->stable_direction();
  if (tr.suspension) return {v[0], v[1], 0.0};
  return v;
}

LeafSegment straight_segment(const DynamicalSystem& sys, LeafKind kind, const Point& x, const Vec3& dir,
                             double radius, double spacing) {
  LeafSegment seg;
  seg.kind = kind;
  const int K = radius > 0.0 ? std::max(1, static_cast<int>(std::ceil(radius / spacing - 1e-12))) : 0;
  for (int k = -K; k <= K; ++k) {
    const double u = K ? radius * k / K : 0.0;
    seg.points.push_back(k == 0 ? x : sys.chart_point(x, scaled(dir, u)));
  }
  seg.anchor = static_cast<std::size_t>(K);
  finish(sys, seg);
  return seg;
}

Walk walk_curve(const DynamicalSystem& sys, LeafKind kind, const Curve& curve, double radius, double spacing) {
  Walk w;
  w.seg.kind = kind;
  const Point origin = curve(0.0);
  if (radius <= 0.0) {
    w.seg.points = {origin};
    w.taus = {0.0};
    finish(sys, w.seg);
    return w;
  }
  std::vector<Point> side_pts[2];
  std::vector<double> side_tau[2];
  for (int side = 0; side < 2; ++side) {
    const double sgn = side ? 1.0 : -1.0;
    double tau = 0.0, acc = 0.0, h = spacing;
    Point p = origin;
    for (int guard = 0;; ++guard) {
      if (guard > 10'000'000) throw ConvergenceError("leaf walk did not reach the requested radius", acc, guard);
      const Point q = curve(tau + sgn * h);
      const double d = sys.distance(p, q);
      if (d > spacing) {
        h *= 0.5;
        if (h < 1e-300) throw ConvergenceError("leaf walk step underflow", acc, guard);
        continue;
      }
      if (acc + d >= radius) {
        // bisect the last step so the end vertex sits at arclength `radius`
        double lo = 0.0, hi = h;
        Point best = q;
        double best_tau = tau + sgn * h;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          const Point m = curve(tau + sgn * mid);
          const double dm = sys.distance(p, m);
          if (acc + dm >= radius) {
            hi = mid;
            best = m;
            best_tau = tau + sgn * mid;
          } else {
            lo = mid;
          }
          if (std::abs(acc + dm - radius) <= 1e-14 * radius || hi - lo <= 1e-300) break;
        }
        side_pts[side].push_back(best);
        side_tau[side].push_back(best_tau);
        break;
      }
      tau += sgn * h;
      acc += d;
      p = q;
      side_pts[side].push_back(q);
      side_tau[side].push_back(tau);
      if (d < 0.5 * spacing) h *= 1.5;
    }
  }
  for (std::size_t i = side_pts[0].size(); i-- > 0;) {
    w.seg.points.push_back(side_pts[0][i]);
    w.taus.push_back(side_tau[0][i]);
  }
  w.seg.anchor = w.seg.points.size();
  w.seg.points.push_back(origin);
  w.taus.push_back(0.0);
  for (std::size_t i = 0; i < side_pts[1].size(); ++i) {
    w.seg.points.push_back(side_pts[1][i]);
    w.taus.push_back(side_tau[1][i]);
  }
  finish(sys, w.seg);
  return w;
}

}  // namespace detail

namespace {

using detail::Curve;
using detail::Walk;

// Closed-form strong leaves of the suspension through (b, s):
//   unstable: (b + τv, s − Σ_{j≥1} [r(A^{-j}b + τμ^{-j}v) − r(A^{-j}b)])
//   stable:   (b + τw, s + Σ_{j≥0} [r(A^{j}b + τν^{j}w) − r(A^{j}b)])
// The displaced orbit is written relative to the base orbit, so rounding in
// the orbit itself only moves where r is sampled.
Curve exact_suspension_leaf(const SuspensionFlow& flow, const Point& x, LeafKind kind) {
  const auto& a = flow.base_map();
  const bool unstable = kind == LeafKind::Unstable;
  const Vec3 v = unstable ? a.unstable_direction() : a.stable_direction();
  const double mu = unstable ? a.unstable_eigenvalue() : a.stable_eigenvalue();
  const double lip = flow.roof().lipschitz();
  return [&flow, x, v, mu, lip, unstable](double tau) {
    const auto& amap = flow.base_map();
    const Roof& r = flow.roof();
    double shift = 0.0;
    if (!r.is_constant() && tau != 0.0) {
      Point pb{x[0], x[1]};
      double scale = 1.0;  // μ^{-j} or ν^{j}
      int j = unstable ? 1 : 0;
      if (unstable) {
        pb = amap.apply_inverse(pb);
        scale = 1.0 / mu;
      }
      for (; j < 400; ++j) {
        const Point q{wrap_unit(pb[0] + tau * scale * v[0]), wrap_unit(pb[1] + tau * scale * v[1])};
        shift += r(q) - r(pb);
        if (std::abs(tau * scale) * lip < 1e-18) break;
        if (unstable) {
          pb = amap.apply_inverse(pb);
          scale /= mu;
        } else {
          pb = amap.apply(pb);
          scale *= mu;
        }
      }
    }
    const double h = unstable ? x[2] - shift : x[2] + shift;
    return flow.normalize(x[0] + tau * v[0], x[1] + tau * v[1], h);
  };
}

// Backward (forward for stable leaves) graph transform: the depth-k curve is
// f^k applied to the seed line through f^{-k}x. Successive curves are compared
// by pulling each vertex of the new one back to the old seed line.
LeafSegment graph_transform(const DynamicalSystem& sys, const Point& x, LeafKind kind, double radius,
                            double spacing, const FoliationConfig& cfg) {
  const bool unstable = kind == LeafKind::Unstable;
  if (!unstable && !sys.invertible()) throw InputError("stable leaves need an invertible map");
  const Vec3 e = detail::seed_direction(sys, kind);
  const int d = sys.dimension();
  auto fwd = [&](const Point& p) { return unstable ? sys.eval(p) : sys.eval_inverse(p); };
  auto back = [&](const Point& p) { return unstable ? sys.eval_inverse(p) : sys.eval(p); };

  std::vector<Point> seeds{x};  // seeds[k] = f^{-k}x
  auto curve_at = [&](int k) -> Curve {
    return [&, k](double tau) {
      Point p = sys.chart_point(seeds[static_cast<std::size_t>(k)], detail::scaled(e, tau));
      for (int i = 0; i < k; ++i) p = fwd(p);
      return p;
    };
  };

  Walk prev = detail::walk_curve(sys, kind, curve_at(0), radius, spacing);
  if (radius <= 0.0) return prev.seg;
  std::vector<double> gaps;
  double gap = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= cfg.gt_max_iter; ++k) {
    seeds.push_back(back(seeds.back()));
    Walk cur = detail::walk_curve(sys, kind, curve_at(k), radius, spacing);
    const Curve old_curve = curve_at(k - 1);
    const Point& up = seeds[static_cast<std::size_t>(k - 1)];
    gap = 0.0;
    const auto& pts = cur.seg.points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point w = fwd(sys.chart_point(seeds.back(), detail::scaled(e, cur.taus[i])));
      const double tstar = detail::dot(sys.chart_offset(up, w), e, d);
      const Point z = old_curve(tstar);
      const std::size_t a = i == 0 ? 0 : i - 1;
      const std::size_t b = std::min(pts.size() - 1, i + 1);
      Vec3 t = sys.chart_offset(pts[a], pts[b]);
      const double tn = norm(t, d);
      const Vec3 o = sys.chart_offset(z, pts[i]);
      double transverse = norm(o, d);
      if (tn > 0.0) {
        t = detail::scaled(t, 1.0 / tn);
        const double along = detail::dot(o, t, d);
        transverse = std::sqrt(std::max(0.0, transverse * transverse - along * along));
      }
      gap = std::max(gap, transverse);
    }
    gaps.push_back(gap);
    prev = std::move(cur);
    // A single small gap is not enough: successive curves nearly coincide
    // whenever the perturbation is flat along the seed at that depth.
    if (gaps.size() >= 2 && gap < cfg.gt_tol && gaps[gaps.size() - 2] < cfg.gt_tol) {
      prev.seg.gaps = gaps;
      return prev.seg;
    }
  }
  throw ConvergenceError("graph transform did not settle within " + std::to_string(cfg.gt_max_iter) +
                             " iterations (last gap " + format_double(gap) + ")",
                         gap, cfg.gt_max_iter);
}

LeafSegment strong_segment(const DynamicalSystem& sys, const Point& x, double radius, double spacing,
                           const FoliationConfig& cfg, LeafKind kind) {
  if (!(radius >= 0.0)) throw InputError("leaf radius must be >= 0");
  if (!(spacing > 0.0)) throw InputError("leaf spacing must be > 0");
  if (radius > 0.0 && spacing > radius / 10.0 * (1.0 + 1e-12))
    throw InputError("leaf spacing must be <= radius / 10");
  const Point p = sys.canonical(x);
  const auto tr = sys.traits();
  if (!tr.linear) throw InputError(to_string(sys.kind()) + " system has no certified splitting for leaf segments");
  if (tr.exact_leaves && !tr.suspension)
    return detail::straight_segment(sys, kind, p, detail::seed_direction(sys, kind), radius, spacing);
  if (tr.exact_leaves && tr.suspension) {
    if (tr.suspension->roof().is_constant())
      return detail::straight_segment(sys, kind, p, detail::seed_direction(sys, kind), radius, spacing);
    return detail::walk_curve(sys, kind, exact_suspension_leaf(*tr.suspension, p, kind), radius, spacing).seg;
  }
  return graph_transform(sys, p, kind, radius, spacing, cfg);
}

}  // namespace

LeafSegment unstable_segment(const DynamicalSystem& sys, const Point& x, double radius, double spacing,
                             const FoliationConfig& cfg) {
  return strong_segment(sys, x, radius, spacing, cfg, LeafKind::Unstable);
}

LeafSegment stable_segment(const DynamicalSystem& sys, const Point& x, double radius, double spacing,
                           const FoliationConfig& cfg) {
  return strong_segment(sys, x, radius, spacing, cfg, LeafKind::Stable);
}

LeafSegment center_segment(const DynamicalSystem& sys, const Point& x, double length, double spacing,
                           const FoliationConfig& cfg) {
  const auto tr = sys.traits();
  if (!tr.suspension || !tr.center_preserving)
    throw InputError("center segments need a time-t map or a center-preserving perturbation");
  if (!(length >= 0.0)) throw InputError("center segment length must be >= 0");
  if (length > cfg.K0) throw InputError("center segment length exceeds the K0 cap");
  if (!(spacing > 0.0)) throw InputError("center segment spacing must be > 0");
  LeafSegment seg;
  seg.kind = LeafKind::Center;
  const Point p = sys.canonical(x);
  const int K = length > 0.0 ? std::max(1, static_cast<int>(std::ceil(length / spacing - 1e-12))) : 0;
  for (int k = 0; k <= K; ++k) seg.points.push_back(k == 0 ? p : tr.suspension->flow(p, length * k / K));
  detail::finish(sys, seg);
  return seg;
}

LeafSegment center_interval(const DynamicalSystem& sys, const Point& x, double spacing) {
  const double len = sys.center_time(x);
  FoliationConfig cfg;
  cfg.K0 = std::max(cfg.K0, len);
  return center_segment(sys, x, len, spacing, cfg);
}

double distance_to_segment(const DynamicalSystem& sys, const LeafSegment& seg, const Point& p) {
  if (seg.points.empty()) throw InputError("empty leaf segment");
  if (seg.points.size() == 1) return sys.distance(seg.points[0], p);
  const int d = sys.dimension();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < seg.points.size(); ++i) {
    const Point& a = seg.points[i];
    const Vec3 ab = sys.chart_offset(a, seg.points[i + 1]);
    const Vec3 ap = sys.chart_offset(a, p);
    const double len2 = detail::dot(ab, ab, d);
    double t = len2 > 0.0 ? detail::dot(ap, ab, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    Vec3 diff{};
    for (int k = 0; k < d; ++k)
      diff[static_cast<std::size_t>(k)] = ap[static_cast<std::size_t>(k)] - t * ab[static_cast<std::size_t>(k)];
    best = std::min(best, norm(diff, d));
  }
  return best;
}

double center_offset(const DynamicalSystem& sys, const Point& x, const Point& y, double tol) {
  const auto tr = sys.traits();
  if (!tr.suspension || !tr.center_preserving)
    throw InputError("center offsets need a time-t map or a center-preserving perturbation");
  return tr.suspension->center_time_between(sys.canonical(x), sys.canonical(y), tol);
}

}  // namespace bowen
