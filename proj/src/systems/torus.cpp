#include <algorithm>
#include <cmath>
#include <complex>

#include "bowen/systems.hpp"

namespace bowen {

namespace {

constexpr double kUnitBand = 1e-9;

std::int64_t det_exact(const IntMatrix& m) {
  switch (m.rows()) {
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default:
      throw InputError("torus dimension must be 1, 2 or 3");
  }
}

IntMatrix adjugate(const IntMatrix& m) {
  const auto n = m.rows();
  IntMatrix adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1;
    return adj;
  }
  if (n == 2) {
    adj << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return adj;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      adj(i, j) = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
    }
  }
  return adj;
}

Vec3 unit_vec(const Eigen::VectorXd& v) {
  Vec3 out{};
  const double n = v.norm();
  double sign = 1.0;
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      sign = v(i) < 0 ? -1.0 : 1.0;
      break;
    }
  }
  for (int i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = sign * v(i) / n;
  return out;
}

}  // namespace

IntMatrix int_matrix(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  IntMatrix m(n, n);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != n) throw InputError("matrix must be square");
    Eigen::Index j = 0;
    for (auto v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

TorusPoint::TorusPoint(std::initializer_list<double> coords)
    : TorusPoint(std::span<const double>(coords.begin(), coords.size())) {}

TorusPoint::TorusPoint(std::span<const double> coords) : p_(coords) {
  for (int i = 0; i < p_.dim; ++i) p_[i] = wrap_unit(p_[i]);
}

TorusPoint::TorusPoint(const Point& raw) : p_(raw) {
  if (p_.dim < 1 || p_.dim > kMaxDim) throw InputError("torus point dimension must be in [1, 3]");
  for (int i = 0; i < p_.dim; ++i) p_[i] = wrap_unit(p_[i]);
}

double torus_distance(const Point& p, const Point& q) {
  if (p.dim != q.dim)
    throw InputError("torus_distance: dimension mismatch (" + std::to_string(p.dim) + " vs " +
                     std::to_string(q.dim) + ")");
  double s = 0.0;
  for (int i = 0; i < p.dim; ++i) {
    double d = std::abs(p[i] - q[i]);
    d = std::min(d, 1.0 - d);
    s += d * d;
  }
  return std::sqrt(s);
}

double torus_distance(const TorusPoint& p, const TorusPoint& q) {
  return torus_distance(p.point(), q.point());
}

ToralAutomorphism::ToralAutomorphism(IntMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1 || matrix_.rows() > kMaxDim)
    throw InputError("toral automorphism needs a square 1x1, 2x2 or 3x3 integer matrix");
  const std::int64_t det = det_exact(matrix_);
  if (det != 1 && det != -1)
    throw InputError("toral automorphism needs |det| = 1, got det = " + std::to_string(det));
  inverse_ = adjugate(matrix_) * det;  // det = ±1, so adj/det = adj·det
  const IntMatrix id = IntMatrix::Identity(matrix_.rows(), matrix_.cols());
  if (inverse_ * matrix_ != id) throw InputError("integer inverse check failed");
  matrix_d_ = matrix_.cast<double>();
  inverse_d_ = inverse_.cast<double>();

  Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix_d_);
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  const int n = dim();

  report_.moduli.clear();
  for (int i = 0; i < n; ++i) report_.moduli.push_back(std::abs(values(i)));
  std::sort(report_.moduli.begin(), report_.moduli.end(), std::greater<>());
  report_.hyperbolic = std::none_of(report_.moduli.begin(), report_.moduli.end(), [](double m) {
    return m >= 1.0 - kUnitBand && m <= 1.0 + kUnitBand;
  });
  double smallest_above = 0.0, largest_below = 0.0;
  for (double m : report_.moduli) {
    if (m > 1.0 + kUnitBand) {
      ++report_.unstable_dim;
      report_.entropy += std::log(m);
      if (smallest_above == 0.0 || m < smallest_above) smallest_above = m;
    } else if (m < 1.0 - kUnitBand) {
      ++report_.stable_dim;
      largest_below = std::max(largest_below, m);
    }
  }
  if (smallest_above > 0.0) {
    report_.expansion = smallest_above;
    report_.log_expansion = std::log(smallest_above);
  }
  if (largest_below > 0.0) report_.contraction = largest_below;

  // Dominant and subdominant real eigendirections.
  int top = -1, bottom = -1;
  for (int i = 0; i < n; ++i) {
    if (std::abs(values(i).imag()) > 1e-12) continue;
    if (top < 0 || std::abs(values(i)) > std::abs(values(top))) top = i;
    if (bottom < 0 || std::abs(values(i)) < std::abs(values(bottom))) bottom = i;
  }
  unstable_dir_ = {1.0, 0.0, 0.0};
  stable_dir_ = {n > 1 ? 0.0 : 1.0, n > 1 ? 1.0 : 0.0, 0.0};
  if (top >= 0) {
    unstable_dir_ = unit_vec(vectors.col(top).real());
    unstable_eig_ = values(top).real();
  }
  if (bottom >= 0 && bottom != top) {
    stable_dir_ = unit_vec(vectors.col(bottom).real());
    stable_eig_ = values(bottom).real();
  }
}

Point ToralAutomorphism::apply(const Point& p) const {
  Point out;
  out.dim = dim();
  for (int i = 0; i < dim(); ++i) {
    double s = 0.0;
    for (int j = 0; j < dim(); ++j) s += static_cast<double>(matrix_(i, j)) * p[j];
    out[i] = wrap_unit(s);
  }
  return out;
}

Point ToralAutomorphism::apply_inverse(const Point& p) const {
  Point out;
  out.dim = dim();
  for (int i = 0; i < dim(); ++i) {
    double s = 0.0;
    for (int j = 0; j < dim(); ++j) s += static_cast<double>(inverse_(i, j)) * p[j];
    out[i] = wrap_unit(s);
  }
  return out;
}

Vec3 ToralAutomorphism::push(const Vec3& v) const {
  Vec3 out{};
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j)
      out[static_cast<std::size_t>(i)] += matrix_d_(i, j) * v[static_cast<std::size_t>(j)];
  return out;
}

Vec3 ToralAutomorphism::pull(const Vec3& v) const {
  Vec3 out{};
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j)
      out[static_cast<std::size_t>(i)] += inverse_d_(i, j) * v[static_cast<std::size_t>(j)];
  return out;
}

TorusPoint apply_automorphism(const ToralAutomorphism& a, const TorusPoint& p) {
  if (p.dim() != a.dim()) throw InputError("apply_automorphism: dimension mismatch");
  return TorusPoint(a.apply(p.point()));
}

HyperbolicityReport verify_hyperbolicity(const ToralAutomorphism& a) { return a.report(); }

HyperbolicityReport verify_hyperbolicity(const IntMatrix& m) {
  return ToralAutomorphism(m).report();
}

}  // namespace bowen
