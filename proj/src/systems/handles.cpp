#include <cmath>

#include "bowen/systems.hpp"

namespace bowen {

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::Toral:
      return "toral";
    case SystemKind::Endomorphism:
      return "endomorphism";
    case SystemKind::TimeT:
      return "time_t";
    case SystemKind::Perturbed:
      return "perturbed";
  }
  return "unknown";
}

double DynamicalSystem::center_time(const Point&) const {
  throw InputError(to_string(kind()) + " system has no center (flow) direction");
}

namespace {

json matrix_json(const IntMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Point torus_canonical(const Point& p) {
  Point out = p;
  for (int i = 0; i < p.dim; ++i) out[i] = wrap_unit(p[i]);
  for (int i = p.dim; i < kMaxDim; ++i) out[i] = 0.0;
  return out;
}

Vec3 torus_offset(const Point& o, const Point& q) {
  Vec3 v{};
  for (int i = 0; i < o.dim; ++i) v[static_cast<std::size_t>(i)] = wrapped_delta(o[i], q[i]);
  return v;
}

Point torus_chart_point(const Point& o, const Vec3& off) {
  Point out = o;
  for (int i = 0; i < o.dim; ++i) out[i] = wrap_unit(o[i] + off[static_cast<std::size_t>(i)]);
  return out;
}

Point torus_sample(int dim, std::mt19937_64& rng) {
  Point p;
  p.dim = dim;
  for (int i = 0; i < dim; ++i) p[i] = unit_double(rng);
  return p;
}

IndexLayout torus_layout(int dim) {
  IndexLayout l;
  l.dims = dim;
  for (int i = 0; i < dim; ++i) l.periodic[static_cast<std::size_t>(i)] = true;
  return l;
}

void check_dim(const Point& p, int dim) {
  if (p.dim != dim)
    throw InputError("point of dimension " + std::to_string(p.dim) + " passed to a system of dimension " +
                     std::to_string(dim));
}

class ToralHandle final : public DynamicalSystem {
 public:
  explicit ToralHandle(ToralAutomorphism a) : a_(std::move(a)) {}

  SystemKind kind() const override { return SystemKind::Toral; }
  int dimension() const override { return a_.dim(); }
  Point eval(const Point& p) const override {
    check_dim(p, a_.dim());
    return a_.apply(p);
  }
  Point eval_inverse(const Point& p) const override {
    check_dim(p, a_.dim());
    return a_.apply_inverse(p);
  }
  Eigen::MatrixXd derivative(const Point&) const override { return a_.real_matrix(); }
  double distance(const Point& p, const Point& q) const override { return torus_distance(p, q); }
  Point canonical(const Point& p) const override { return torus_canonical(p); }
  Vec3 chart_offset(const Point& o, const Point& q) const override { return torus_offset(o, q); }
  Point chart_point(const Point& o, const Vec3& off) const override { return torus_chart_point(o, off); }
  Point sample(std::mt19937_64& rng) const override { return torus_sample(a_.dim(), rng); }
  IndexLayout index_layout() const override { return torus_layout(a_.dim()); }
  void index_images(const Point& p, double, std::vector<Vec3>& out) const override { out.push_back(p.x); }
  SystemTraits traits() const override {
    SystemTraits t;
    t.linear = &a_;
    t.exact_leaves = true;
    return t;
  }
  json config() const override { return {{"kind", "toral"}, {"matrix", matrix_json(a_.matrix())}}; }

 private:
  ToralAutomorphism a_;
};

class EndomorphismHandle final : public DynamicalSystem {
 public:
  explicit EndomorphismHandle(IntMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1 || m_.rows() > kMaxDim)
      throw InputError("endomorphism needs a square 1x1, 2x2 or 3x3 integer matrix");
    if (m_.cast<double>().determinant() == 0.0) throw InputError("endomorphism matrix is singular");
    md_ = m_.cast<double>();
  }

  SystemKind kind() const override { return SystemKind::Endomorphism; }
  int dimension() const override { return static_cast<int>(m_.rows()); }
  Point eval(const Point& p) const override {
    check_dim(p, dimension());
    Point out;
    out.dim = p.dim;
    for (int i = 0; i < p.dim; ++i) {
      double s = 0.0;
      for (int j = 0; j < p.dim; ++j) s += static_cast<double>(m_(i, j)) * p[j];
      out[i] = wrap_unit(s);
    }
    return out;
  }
  Point eval_inverse(const Point&) const override {
    throw InputError("endomorphism is not invertible");
  }
  bool invertible() const override { return false; }
  Eigen::MatrixXd derivative(const Point&) const override { return md_; }
  double distance(const Point& p, const Point& q) const override { return torus_distance(p, q); }
  Point canonical(const Point& p) const override { return torus_canonical(p); }
  Vec3 chart_offset(const Point& o, const Point& q) const override { return torus_offset(o, q); }
  Point chart_point(const Point& o, const Vec3& off) const override { return torus_chart_point(o, off); }
  Point sample(std::mt19937_64& rng) const override { return torus_sample(dimension(), rng); }
  IndexLayout index_layout() const override { return torus_layout(dimension()); }
  void index_images(const Point& p, double, std::vector<Vec3>& out) const override { out.push_back(p.x); }
  json config() const override { return {{"kind", "endomorphism"}, {"matrix", matrix_json(m_)}}; }

 private:
  IntMatrix m_;
  Eigen::MatrixXd md_;
};

class TimeTHandle final : public DynamicalSystem {
 public:
  TimeTHandle(std::shared_ptr<const SuspensionFlow> flow, double t) : flow_(std::move(flow)), t_(t) {
    if (!flow_) throw InputError("time_t_map: null flow");
    if (!std::isfinite(t_)) throw InputError("time_t_map: t must be finite");
  }

  SystemKind kind() const override { return SystemKind::TimeT; }
  int dimension() const override { return 3; }
  Point eval(const Point& p) const override {
    check_dim(p, 3);
    return flow_->flow(p, t_);
  }
  Point eval_inverse(const Point& p) const override {
    check_dim(p, 3);
    return flow_->flow(p, -t_);
  }
  Eigen::MatrixXd derivative(const Point& p) const override {
    Eigen::Matrix3d j;
    flow_->flow(p, t_, j);
    return j;
  }
  double distance(const Point& p, const Point& q) const override { return flow_->distance(p, q); }
  Point canonical(const Point& p) const override {
    check_dim(p, 3);
    return flow_->normalize(p);
  }
  Vec3 chart_offset(const Point& o, const Point& q) const override { return flow_->chart_offset(o, q); }
  Point chart_point(const Point& o, const Vec3& off) const override { return flow_->chart_point(o, off); }
  Point sample(std::mt19937_64& rng) const override { return flow_->sample(rng); }
  IndexLayout index_layout() const override {
    IndexLayout l;
    l.dims = 3;
    l.periodic = {true, true, false};
    return l;
  }
  void index_images(const Point& p, double margin, std::vector<Vec3>& out) const override {
    out.push_back(p.x);
    const Point b{p[0], p[1]};
    const auto& a = flow_->base_map();
    const double r = flow_->roof()(b);
    if (p[2] >= r - margin) {
      const Point up = a.apply(b);
      out.push_back(Vec3{up[0], up[1], p[2] - r});
    }
    if (p[2] < margin) {
      const Point down = a.apply_inverse(b);
      out.push_back(Vec3{down[0], down[1], p[2] + flow_->roof()(down)});
    }
  }
  double seam_margin(double radius) const override {
    return radius * (1.0 + flow_->roof().lipschitz());
  }
  SystemTraits traits() const override {
    SystemTraits tr;
    tr.linear = &flow_->base_map();
    tr.suspension = flow_.get();
    tr.exact_leaves = true;
    tr.center_preserving = true;
    return tr;
  }
  double center_time(const Point&) const override { return t_; }
  json config() const override {
    return {{"kind", "time_t"},
            {"matrix", matrix_json(flow_->base_map().matrix())},
            {"roof", flow_->roof().to_json()},
            {"t", t_}};
  }

  double t() const { return t_; }
  const std::shared_ptr<const SuspensionFlow>& flow() const { return flow_; }

 private:
  std::shared_ptr<const SuspensionFlow> flow_;
  double t_;
};

}  // namespace

SystemHandle toral_map(ToralAutomorphism a) { return std::make_shared<ToralHandle>(std::move(a)); }

SystemHandle toral_map(const IntMatrix& m) { return toral_map(ToralAutomorphism(m)); }

SystemHandle toral_endomorphism(const IntMatrix& m) { return std::make_shared<EndomorphismHandle>(m); }

SystemHandle time_t_map(std::shared_ptr<const SuspensionFlow> flow, double t) {
  return std::make_shared<TimeTHandle>(std::move(flow), t);
}

SystemHandle time_t_map(const SuspensionFlow& flow, double t) {
  return time_t_map(std::make_shared<const SuspensionFlow>(flow), t);
}

}  // namespace bowen
