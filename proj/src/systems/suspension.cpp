#include <algorithm>
#include <cmath>
#include <numbers>

#include "bowen/systems.hpp"

namespace bowen {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxCrossings = 1 << 20;
}  // namespace

// ---------------------------------------------------------------------------
// Roof

Roof::Roof(double base, std::vector<RoofTerm> terms) : base_(base), terms_(std::move(terms)) {
  if (!(base_ > 0.0)) throw InputError("roof: constant part must be > 0");
  double total = 0.0;
  for (const auto& t : terms_) total += std::abs(t.amplitude);
  if (!(total < base_))
    throw InputError("roof: need sum |a_k| < base for positivity (sum = " + std::to_string(total) +
                     ", base = " + std::to_string(base_) + ")");
}

double Roof::operator()(const Point& b) const {
  double r = base_;
  for (const auto& t : terms_) r += t.amplitude * std::cos(kTwoPi * (t.k1 * b[0] + t.k2 * b[1]));
  return r;
}

std::array<double, 2> Roof::gradient(const Point& b) const {
  std::array<double, 2> g{0.0, 0.0};
  for (const auto& t : terms_) {
    const double s = -t.amplitude * kTwoPi * std::sin(kTwoPi * (t.k1 * b[0] + t.k2 * b[1]));
    g[0] += s * t.k1;
    g[1] += s * t.k2;
  }
  return g;
}

double Roof::min_value() const {
  double total = 0.0;
  for (const auto& t : terms_) total += std::abs(t.amplitude);
  return base_ - total;
}

double Roof::max_value() const {
  double total = 0.0;
  for (const auto& t : terms_) total += std::abs(t.amplitude);
  return base_ + total;
}

double Roof::lipschitz() const {
  double total = 0.0;
  for (const auto& t : terms_)
    total += std::abs(t.amplitude) * kTwoPi * std::hypot(double(t.k1), double(t.k2));
  return total;
}

json Roof::to_json() const {
  json terms = json::array();
  for (const auto& t : terms_) terms.push_back({{"k", {t.k1, t.k2}}, {"amplitude", t.amplitude}});
  return {{"base", base_}, {"terms", terms}};
}

Roof Roof::from_json(const json& j) {
  if (j.is_number()) return Roof(j.get<double>());
  if (!j.is_object()) throw InputError("roof: expected a number or an object");
  for (const auto& [key, _] : j.items())
    if (key != "base" && key != "terms") throw InputError("roof: unknown key '" + key + "'");
  const double base = j.value("base", 1.0);
  std::vector<RoofTerm> terms;
  if (j.contains("terms")) {
    for (const auto& t : j.at("terms")) {
      for (const auto& [key, _] : t.items())
        if (key != "k" && key != "amplitude") throw InputError("roof.terms: unknown key '" + key + "'");
      RoofTerm term;
      const auto& k = t.at("k");
      if (!k.is_array() || k.size() != 2) throw InputError("roof.terms.k: expected [k1, k2]");
      term.k1 = k[0].get<int>();
      term.k2 = k[1].get<int>();
      term.amplitude = t.at("amplitude").get<double>();
      terms.push_back(term);
    }
  }
  return Roof(base, std::move(terms));
}

// ---------------------------------------------------------------------------
// SuspensionFlow

SuspensionFlow::SuspensionFlow(ToralAutomorphism base_map, Roof roof)
    : base_map_(std::move(base_map)), roof_(std::move(roof)) {
  if (base_map_.dim() != 2) throw InputError("suspension flow needs a 2x2 base automorphism");
  if (!base_map_.hyperbolic()) throw InputError("suspension flow needs a hyperbolic base map");
}

Point SuspensionFlow::normalize(double b0, double b1, double h) const {
  Point b{wrap_unit(b0), wrap_unit(b1)};
  for (int guard = 0; guard < kMaxCrossings; ++guard) {
    const double r = roof_(b);
    if (h >= r) {
      h -= r;
      b = base_map_.apply(b);
    } else if (h < 0.0) {
      b = base_map_.apply_inverse(b);
      h += roof_(b);
    } else {
      if (h == 0.0) h = 0.0;
      return Point{b[0], b[1], h};
    }
  }
  throw InputError("suspension: height too far from the fundamental domain");
}

Point SuspensionFlow::flow(const Point& p, double t) const { return normalize(p[0], p[1], p[2] + t); }

Point SuspensionFlow::flow(const Point& p, double t, Eigen::Matrix3d& jac) const {
  jac.setIdentity();
  Point b{wrap_unit(p[0]), wrap_unit(p[1])};
  double h = p[2] + t;
  const auto& a = base_map_.real_matrix();
  const auto& ai = base_map_.real_inverse();
  for (int guard = 0; guard < kMaxCrossings; ++guard) {
    const double r = roof_(b);
    if (h >= r) {
      const auto g = roof_.gradient(b);
      Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
      c.block<2, 2>(0, 0) = a;
      c(2, 0) = -g[0];
      c(2, 1) = -g[1];
      c(2, 2) = 1.0;
      jac = c * jac;
      h -= r;
      b = base_map_.apply(b);
    } else if (h < 0.0) {
      b = base_map_.apply_inverse(b);
      const auto g = roof_.gradient(b);
      Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
      c.block<2, 2>(0, 0) = ai;
      c(2, 0) = g[0] * ai(0, 0) + g[1] * ai(1, 0);
      c(2, 1) = g[0] * ai(0, 1) + g[1] * ai(1, 1);
      c(2, 2) = 1.0;
      jac = c * jac;
      h += roof_(b);
    } else {
      if (h == 0.0) h = 0.0;
      return Point{b[0], b[1], h};
    }
  }
  throw InputError("suspension: height too far from the fundamental domain");
}

double SuspensionFlow::lift_distance(const Point& p, const Point& q) const {
  const Point pb{p[0], p[1]};
  const Point qb{q[0], q[1]};
  const double d0 = std::hypot(torus_distance(pb, qb), p[2] - q[2]);
  const Point up = base_map_.apply(qb);
  const double d1 = std::hypot(torus_distance(pb, up), p[2] - (q[2] - roof_(qb)));
  const Point down = base_map_.apply_inverse(qb);
  const double d2 = std::hypot(torus_distance(pb, down), p[2] - (q[2] + roof_(down)));
  return std::min({d0, d1, d2});
}

double SuspensionFlow::distance(const Point& p, const Point& q) const {
  if (p.dim != 3 || q.dim != 3) throw InputError("suspension_distance: expected 3-D chart points");
  return std::min(lift_distance(p, q), lift_distance(q, p));
}

Vec3 SuspensionFlow::chart_offset(const Point& o, const Point& q) const {
  const Point ob{o[0], o[1]};
  const Point qb{q[0], q[1]};
  const Point up = base_map_.apply(qb);
  const Point down = base_map_.apply_inverse(qb);
  const std::array<Vec3, 3> lifts{Vec3{qb[0], qb[1], q[2]},
                                  Vec3{up[0], up[1], q[2] - roof_(qb)},
                                  Vec3{down[0], down[1], q[2] + roof_(down)}};
  Vec3 best{};
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& l : lifts) {
    const Vec3 off{wrapped_delta(o[0], l[0]), wrapped_delta(o[1], l[1]), l[2] - o[2]};
    const double d = norm(off, 3);
    if (d < best_d) {
      best_d = d;
      best = off;
    }
  }
  return best;
}

Point SuspensionFlow::chart_point(const Point& o, const Vec3& off) const {
  return normalize(o[0] + off[0], o[1] + off[1], o[2] + off[2]);
}

double SuspensionFlow::center_time_between(const Point& x, const Point& y, double tol,
                                           int max_crossings) const {
  const Point yb{y[0], y[1]};
  auto check = [&](const Point& base, double c, double& out) {
    if (torus_distance(base, yb) > tol) return false;
    if (distance(flow(x, c), y) > tol) return false;
    out = c;
    return true;
  };
  double c = 0.0;
  const Point xb{x[0], x[1]};
  if (check(xb, y[2] - x[2], c)) return c;

  Point up = xb, down = xb;
  double t_up = roof_(xb) - x[2];  // time to reach the next sheet
  double t_down = -x[2];           // time to reach the previous sheet's top
  for (int k = 1; k <= max_crossings; ++k) {
    up = base_map_.apply(up);
    if (check(up, t_up + y[2], c)) return c;
    t_up += roof_(up);

    down = base_map_.apply_inverse(down);
    t_down -= roof_(down);
    if (check(down, t_down + y[2], c)) return c;
  }
  throw InputError("center_time_between: y is not on the center leaf of x");
}

Point SuspensionFlow::sample(std::mt19937_64& rng) const {
  const double b0 = unit_double(rng);
  const double b1 = unit_double(rng);
  const double u = unit_double(rng);
  const Point b{b0, b1};
  return normalize(b0, b1, u * roof_(b));
}

Point to_point(const SuspensionPoint& p) {
  if (p.base.dim() != 2) throw InputError("suspension point needs a 2-D base");
  return Point{p.base[0], p.base[1], p.height};
}

SuspensionPoint to_suspension_point(const Point& p) {
  if (p.dim != 3) throw InputError("suspension point needs 3 chart coordinates");
  return SuspensionPoint{TorusPoint{p[0], p[1]}, p[2]};
}

SuspensionPoint flow(const SuspensionFlow& sys, const SuspensionPoint& p, double t) {
  return to_suspension_point(sys.flow(to_point(p), t));
}

double suspension_distance(const SuspensionFlow& sys, const SuspensionPoint& p,
                           const SuspensionPoint& q) {
  return sys.distance(sys.normalize(to_point(p)), sys.normalize(to_point(q)));
}

}  // namespace bowen
