#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bowen/systems.hpp"

namespace bowen {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double profile_value(ShearProfile p, int m, double u) {
  if (p == ShearProfile::Sine) return std::sin(kTwoPi * m * u);
  const double s = std::sin(kPi * m * u);
  return s * s;
}

double profile_slope(ShearProfile p, int m, double u) {
  if (p == ShearProfile::Sine) return kTwoPi * m * std::cos(kTwoPi * m * u);
  return kPi * m * std::sin(kTwoPi * m * u);
}

double profile_slope_bound(ShearProfile p, int m) {
  return p == ShearProfile::Sine ? kTwoPi * m : kPi * m;
}

std::string profile_name(ShearProfile p) { return p == ShearProfile::Sine ? "sine" : "bump"; }

ShearProfile profile_from(const std::string& s) {
  if (s == "sine") return ShearProfile::Sine;
  if (s == "bump") return ShearProfile::Bump;
  throw InputError("shape.terms.profile: expected 'sine' or 'bump', got '" + s + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

PerturbationShape PerturbationShape::center_shear(std::vector<ShearTerm> terms) {
  if (terms.empty()) throw InputError("center shear needs at least one term");
  for (const auto& t : terms) {
    if (t.mode < 1) throw InputError("shear term mode must be >= 1");
    if (!std::isfinite(t.amplitude) || !std::isfinite(t.modulation))
      throw InputError("shear term coefficients must be finite");
  }
  PerturbationShape s;
  s.kind = Kind::CenterShear;
  s.terms = std::move(terms);
  return s;
}

PerturbationShape PerturbationShape::base_shear(std::array<double, 2> direction) {
  if (!std::isfinite(direction[0]) || !std::isfinite(direction[1]) ||
      std::hypot(direction[0], direction[1]) == 0.0)
    throw InputError("base shear needs a finite nonzero direction");
  PerturbationShape s;
  s.kind = Kind::BaseShear;
  s.direction = direction;
  return s;
}

double PerturbationShape::sigma(const Point& p, const Roof& roof) const {
  if (kind != Kind::CenterShear) throw InputError("sigma is defined for center shears only");
  const Point b{p[0], p[1]};
  const double u = p[2] / roof(b);
  double total = 0.0;
  for (const auto& t : terms) {
    const double mod = 1.0 + t.modulation * std::cos(kTwoPi * (t.k1 * b[0] + t.k2 * b[1]));
    total += t.amplitude * profile_value(t.profile, t.mode, u) * mod;
  }
  return total;
}

Vec3 PerturbationShape::sigma_gradient(const Point& p, const Roof& roof) const {
  if (kind != Kind::CenterShear) throw InputError("sigma is defined for center shears only");
  const Point b{p[0], p[1]};
  const double r = roof(b);
  const auto gr = roof.gradient(b);
  const double u = p[2] / r;
  Vec3 g{};
  for (const auto& t : terms) {
    const double phase = kTwoPi * (t.k1 * b[0] + t.k2 * b[1]);
    const double mod = 1.0 + t.modulation * std::cos(phase);
    const double dmod = -t.modulation * kTwoPi * std::sin(phase);
    const double pv = profile_value(t.profile, t.mode, u);
    const double ps = profile_slope(t.profile, t.mode, u);
    // u = s / r(x): ∂u/∂xᵢ = -s rᵢ / r², ∂u/∂s = 1/r
    g[0] += t.amplitude * (ps * (-p[2] * gr[0] / (r * r)) * mod + pv * dmod * t.k1);
    g[1] += t.amplitude * (ps * (-p[2] * gr[1] / (r * r)) * mod + pv * dmod * t.k2);
    g[2] += t.amplitude * ps / r * mod;
  }
  return g;
}

double PerturbationShape::lipschitz(const Roof& roof) const {
  if (kind == Kind::BaseShear) {
    if (!roof.is_constant()) throw InputError("base shear needs a constant roof");
    return std::hypot(direction[0], direction[1]) * kPi / roof.base();
  }
  double total = 0.0;
  for (const auto& t : terms)
    total += std::abs(t.amplitude) * profile_slope_bound(t.profile, t.mode) * (1.0 + std::abs(t.modulation));
  return total / roof.min_value();
}

double PerturbationShape::threshold(const Roof& roof) const {
  const double l = lipschitz(roof);
  return l > 0.0 ? 1.0 / l : std::numeric_limits<double>::infinity();
}

std::string PerturbationShape::id() const {
  if (kind == Kind::BaseShear) return "base_shear(" + fmt(direction[0]) + "," + fmt(direction[1]) + ")";
  std::string s = "center_shear(";
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    if (i) s += "+";
    s += profile_name(t.profile) + "[m=" + std::to_string(t.mode) + ",a=" + fmt(t.amplitude) +
         ",k=" + std::to_string(t.k1) + "," + std::to_string(t.k2) + ",b=" + fmt(t.modulation) + "]";
  }
  return s + ")";
}

json PerturbationShape::to_json() const {
  if (kind == Kind::BaseShear) return {{"kind", "base_shear"}, {"direction", direction}};
  json arr = json::array();
  for (const auto& t : terms)
    arr.push_back({{"profile", profile_name(t.profile)},
                   {"mode", t.mode},
                   {"amplitude", t.amplitude},
                   {"k", {t.k1, t.k2}},
                   {"modulation", t.modulation}});
  return {{"kind", "center_shear"}, {"terms", arr}};
}

PerturbationShape PerturbationShape::from_json(const json& j) {
  if (!j.is_object()) throw InputError("shape: expected an object");
  const std::string kind = j.value("kind", std::string("center_shear"));
  if (kind == "base_shear") {
    for (const auto& [key, _] : j.items())
      if (key != "kind" && key != "direction") throw InputError("shape: unknown key '" + key + "'");
    const auto& d = j.at("direction");
    if (!d.is_array() || d.size() != 2) throw InputError("shape.direction: expected [w1, w2]");
    return base_shear({d[0].get<double>(), d[1].get<double>()});
  }
  if (kind != "center_shear")
    throw InputError("shape.kind: expected 'center_shear' or 'base_shear', got '" + kind + "'");
  for (const auto& [key, _] : j.items())
    if (key != "kind" && key != "terms") throw InputError("shape: unknown key '" + key + "'");
  std::vector<ShearTerm> terms;
  for (const auto& t : j.at("terms")) {
    for (const auto& [key, _] : t.items())
      if (key != "profile" && key != "mode" && key != "amplitude" && key != "k" && key != "modulation")
        throw InputError("shape.terms: unknown key '" + key + "'");
    ShearTerm term;
    term.profile = profile_from(t.value("profile", std::string("sine")));
    term.mode = t.value("mode", 1);
    term.amplitude = t.value("amplitude", 1.0);
    term.modulation = t.value("modulation", 0.0);
    if (t.contains("k")) {
      const auto& k = t.at("k");
      if (!k.is_array() || k.size() != 2) throw InputError("shape.terms.k: expected [k1, k2]");
      term.k1 = k[0].get<int>();
      term.k2 = k[1].get<int>();
    }
    terms.push_back(term);
  }
  return center_shear(std::move(terms));
}

// ---------------------------------------------------------------------------
// g_ε and its inverse

Point shape_map(const SuspensionFlow& flow, double eps, const PerturbationShape& shape, const Point& p) {
  if (eps == 0.0) return p;
  if (shape.kind == PerturbationShape::Kind::CenterShear)
    return flow.flow(p, eps * shape.sigma(p, flow.roof()));
  const double c = flow.roof().base();
  const double w = std::sin(kPi * p[2] / c);
  return flow.normalize(p[0] + eps * shape.direction[0] * w * w, p[1] + eps * shape.direction[1] * w * w, p[2]);
}

Point shape_map_inverse(const SuspensionFlow& flow, double eps, const PerturbationShape& shape,
                        const Point& q) {
  if (eps == 0.0) return q;
  if (shape.kind == PerturbationShape::Kind::BaseShear) {
    const double c = flow.roof().base();
    const double w = std::sin(kPi * q[2] / c);
    return flow.normalize(q[0] - eps * shape.direction[0] * w * w, q[1] - eps * shape.direction[1] * w * w,
                          q[2]);
  }
  // Solve τ = ε·σ(flow(q, −τ)); then g⁻¹(q) = flow(q, −τ).
  const Roof& roof = flow.roof();
  double tau = eps * shape.sigma(q, roof);
  for (int it = 0; it < 60; ++it) {
    const Point p = flow.flow(q, -tau);
    const double f = tau - eps * shape.sigma(p, roof);
    const double df = 1.0 + eps * shape.sigma_gradient(p, roof)[2];
    const double step = f / df;
    tau -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(tau))) break;
  }
  return flow.flow(q, -tau);
}

Eigen::Matrix3d shape_jacobian(const SuspensionFlow& flow, double eps, const PerturbationShape& shape,
                               const Point& p) {
  if (shape.kind == PerturbationShape::Kind::BaseShear) {
    const double c = flow.roof().base();
    const double d = eps * kPi / c * std::sin(kTwoPi * p[2] / c);
    Eigen::Matrix3d j = Eigen::Matrix3d::Identity();
    j(0, 2) = shape.direction[0] * d;
    j(1, 2) = shape.direction[1] * d;
    return j;
  }
  Eigen::Matrix3d j;
  flow.flow(p, eps * shape.sigma(p, flow.roof()), j);
  const Vec3 g = shape.sigma_gradient(p, flow.roof());
  j(2, 0) += eps * g[0];
  j(2, 1) += eps * g[1];
  j(2, 2) += eps * g[2];
  return j;
}

double perturbation_min_determinant(const SuspensionFlow& flow, double epsilon,
                                    const PerturbationShape& shape, int grid) {
  if (grid < 1) throw InputError("determinant grid must be >= 1");
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    for (int k = 0; k < grid; ++k) {
      const Point b{(i + 0.5) / grid, (k + 0.5) / grid};
      const double r = flow.roof()(b);
      for (int l = 0; l < grid; ++l) {
        const Point p{b[0], b[1], (l + 0.5) / grid * r};
        lo = std::min(lo, std::abs(shape_jacobian(flow, epsilon, shape, p).determinant()));
      }
    }
  }
  return lo;
}

namespace {

class PerturbedHandle final : public DynamicalSystem {
 public:
  PerturbedHandle(SystemHandle ref, double eps, PerturbationShape shape)
      : ref_(std::move(ref)), eps_(eps), shape_(std::move(shape)) {
    flow_ = ref_->traits().suspension;
  }

  SystemKind kind() const override { return SystemKind::Perturbed; }
  int dimension() const override { return 3; }
  Point eval(const Point& p) const override { return ref_->eval(shape_map(*flow_, eps_, shape_, p)); }
  Point eval_inverse(const Point& p) const override {
    return shape_map_inverse(*flow_, eps_, shape_, ref_->eval_inverse(p));
  }
  Eigen::MatrixXd derivative(const Point& p) const override {
    const Point g = shape_map(*flow_, eps_, shape_, p);
    Eigen::MatrixXd outer = ref_->derivative(g);
    return outer * shape_jacobian(*flow_, eps_, shape_, p);
  }
  double distance(const Point& p, const Point& q) const override { return ref_->distance(p, q); }
  Point canonical(const Point& p) const override { return ref_->canonical(p); }
  Vec3 chart_offset(const Point& o, const Point& q) const override { return ref_->chart_offset(o, q); }
  Point chart_point(const Point& o, const Vec3& off) const override { return ref_->chart_point(o, off); }
  Point sample(std::mt19937_64& rng) const override { return ref_->sample(rng); }
  IndexLayout index_layout() const override { return ref_->index_layout(); }
  void index_images(const Point& p, double margin, std::vector<Vec3>& out) const override {
    ref_->index_images(p, margin, out);
  }
  double seam_margin(double radius) const override { return ref_->seam_margin(radius); }
  SystemTraits traits() const override {
    SystemTraits t = ref_->traits();
    t.exact_leaves = false;
    t.center_preserving = shape_.kind == PerturbationShape::Kind::CenterShear;
    return t;
  }
  double center_time(const Point& p) const override {
    if (shape_.kind != PerturbationShape::Kind::CenterShear)
      throw InputError("base-shear perturbation does not preserve center leaves");
    return ref_->center_time(p) + eps_ * shape_.sigma(p, flow_->roof());
  }
  json config() const override {
    return {{"kind", "perturbed"}, {"reference", ref_->config()}, {"epsilon", eps_}, {"shape", shape_.to_json()}};
  }

 private:
  SystemHandle ref_;
  double eps_;
  PerturbationShape shape_;
  const SuspensionFlow* flow_ = nullptr;
};

}  // namespace

SystemHandle perturbed_map(const SystemHandle& reference, double epsilon, const PerturbationShape& shape) {
  if (!reference || reference->kind() != SystemKind::TimeT)
    throw InputError("perturbed_map: reference must be a time-t map of a suspension flow");
  if (!std::isfinite(epsilon) || epsilon < 0.0) throw InputError("perturbed_map: epsilon must be >= 0");
  const SuspensionFlow& flow = *reference->traits().suspension;
  const double eps_max = shape.threshold(flow.roof());
  if (epsilon >= eps_max)
    throw AdmissibilityError("perturbed_map: epsilon = " + fmt(epsilon) + " is not below eps_max = " +
                                 fmt(eps_max) + " for shape " + shape.id(),
                             eps_max);
  if (epsilon > 0.0) {
    const double det = perturbation_min_determinant(flow, epsilon, shape);
    if (!(det > 1e-9))
      throw AdmissibilityError("perturbed_map: derivative determinant check failed (min |det| = " + fmt(det) + ")",
                               eps_max);
  }
  return std::make_shared<PerturbedHandle>(reference, epsilon, shape);
}

}  // namespace bowen
