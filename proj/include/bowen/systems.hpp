#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bowen/geometry.hpp"

namespace bowen {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using nlohmann::json;

IntMatrix int_matrix(std::initializer_list<std::initializer_list<std::int64_t>> rows);

// ---------------------------------------------------------------------------
// Torus points and linear maps

/// A point of ℝᵈ/ℤᵈ (d ≤ 3) held as its canonical representative in [0,1)ᵈ.
class TorusPoint {
 public:
  TorusPoint(std::initializer_list<double> coords);
  explicit TorusPoint(std::span<const double> coords);
  explicit TorusPoint(const Point& raw);

  int dim() const { return p_.dim; }
  double operator[](int i) const { return p_[i]; }
  const Point& point() const { return p_; }

  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;

 private:
  Point p_;
};

/// Shortest-lift Euclidean distance on the flat torus.
double torus_distance(const TorusPoint& p, const TorusPoint& q);
/// Same metric on raw points, which must already be canonical.
double torus_distance(const Point& p, const Point& q);

struct HyperbolicityReport {
  std::vector<double> moduli;  ///< eigenvalue moduli, descending
  bool hyperbolic = false;
  /// log of the smallest modulus above 1 (0 when there is none)
  double log_expansion = 0.0;
  double expansion = 1.0;   ///< smallest modulus > 1
  double contraction = 1.0; ///< largest modulus < 1
  int unstable_dim = 0;
  int stable_dim = 0;
  /// Σ log|μ| over |μ| > 1: the topological entropy of the automorphism.
  double entropy = 0.0;
};

/// Integer matrix with |det| = 1 acting on 𝕋ᵈ. Spectral data is computed once.
class ToralAutomorphism {
 public:
  explicit ToralAutomorphism(IntMatrix matrix);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const IntMatrix& matrix() const { return matrix_; }
  const IntMatrix& inverse_matrix() const { return inverse_; }
  const Eigen::MatrixXd& real_matrix() const { return matrix_d_; }
  const Eigen::MatrixXd& real_inverse() const { return inverse_d_; }
  const HyperbolicityReport& report() const { return report_; }
  bool hyperbolic() const { return report_.hyperbolic; }

  Point apply(const Point& p) const;
  Point apply_inverse(const Point& p) const;
  /// A·v without reduction mod 1 (for tangent vectors and chart offsets).
  Vec3 push(const Vec3& v) const;
  Vec3 pull(const Vec3& v) const;

  /// Unit eigenvector of the real eigenvalue of largest modulus. For a
  /// hyperbolic map with one-dimensional unstable bundle this spans Eᵘ.
  const Vec3& unstable_direction() const { return unstable_dir_; }
  const Vec3& stable_direction() const { return stable_dir_; }
  double unstable_eigenvalue() const { return unstable_eig_; }
  double stable_eigenvalue() const { return stable_eig_; }

 private:
  IntMatrix matrix_;
  IntMatrix inverse_;
  Eigen::MatrixXd matrix_d_;
  Eigen::MatrixXd inverse_d_;
  HyperbolicityReport report_;
  Vec3 unstable_dir_{};
  Vec3 stable_dir_{};
  double unstable_eig_ = 1.0;
  double stable_eig_ = 1.0;
};

TorusPoint apply_automorphism(const ToralAutomorphism& a, const TorusPoint& p);
HyperbolicityReport verify_hyperbolicity(const ToralAutomorphism& a);
HyperbolicityReport verify_hyperbolicity(const IntMatrix& m);

// ---------------------------------------------------------------------------
// Mapping torus

struct RoofTerm {
  int k1 = 0;
  int k2 = 0;
  double amplitude = 0.0;
};

/// roof(x) = base + Σ aₖ cos(2π kᵀx). Positive by the bound Σ|aₖ| < base.
class Roof {
 public:
  Roof() = default;
  explicit Roof(double base, std::vector<RoofTerm> terms = {});
  static Roof constant(double c) { return Roof(c); }

  double operator()(const Point& base) const;
  std::array<double, 2> gradient(const Point& base) const;
  double base() const { return base_; }
  const std::vector<RoofTerm>& terms() const { return terms_; }
  double min_value() const;
  double max_value() const;
  double lipschitz() const;
  bool is_constant() const { return terms_.empty(); }

  json to_json() const;
  static Roof from_json(const json& j);

 private:
  double base_ = 1.0;
  std::vector<RoofTerm> terms_;
};

/// A point of the mapping torus in the chart 𝕋² × [0, roof).
struct SuspensionPoint {
  TorusPoint base;
  double height = 0.0;
};

/// Unit-speed vertical flow on {(x, s): 0 ≤ s < roof(x)} with (x, roof(x))
/// glued to (A·x, 0). Points are kept canonical: the identification is applied
/// eagerly after every operation.
class SuspensionFlow {
 public:
  SuspensionFlow(ToralAutomorphism base_map, Roof roof);

  const ToralAutomorphism& base_map() const { return base_map_; }
  const Roof& roof() const { return roof_; }

  /// Canonical point for base b (any lift) at height h (any real).
  Point normalize(double b0, double b1, double h) const;
  Point normalize(const Point& raw) const { return normalize(raw[0], raw[1], raw[2]); }

  Point flow(const Point& p, double t) const;
  /// Flow together with its Jacobian in chart coordinates.
  Point flow(const Point& p, double t, Eigen::Matrix3d& jacobian) const;

  /// Symmetrised minimum over the three nearby lifts of the identification.
  double distance(const Point& p, const Point& q) const;

  /// Offset of q from origin in origin's chart, using the closest lift.
  Vec3 chart_offset(const Point& origin, const Point& q) const;
  Point chart_point(const Point& origin, const Vec3& offset) const;

  /// Flow time c with flow(x, c) = y, searching up to `max_crossings` sheets
  /// in each direction. Throws InputError when y is not on the flow line of
  /// x within `tol`.
  double center_time_between(const Point& x, const Point& y, double tol = 1e-8,
                             int max_crossings = 12) const;

  Point sample(std::mt19937_64& rng) const;

 private:
  double lift_distance(const Point& p, const Point& q) const;

  ToralAutomorphism base_map_;
  Roof roof_;
};

Point to_point(const SuspensionPoint& p);
SuspensionPoint to_suspension_point(const Point& p);
SuspensionPoint flow(const SuspensionFlow& sys, const SuspensionPoint& p, double t);
double suspension_distance(const SuspensionFlow& sys, const SuspensionPoint& p,
                           const SuspensionPoint& q);

// ---------------------------------------------------------------------------
// Uniform system interface

enum class SystemKind { Toral, Endomorphism, TimeT, Perturbed };

std::string to_string(SystemKind kind);

/// Axes of the coordinates used by spatial indexes. Periodic axes have period
/// one; non-periodic axes are plain reals.
struct IndexLayout {
  int dims = 0;
  std::array<bool, kMaxDim> periodic{};
};

/// Structural facts the foliation and growth code dispatch on.
struct SystemTraits {
  const ToralAutomorphism* linear = nullptr;   ///< torus map, or base of a suspension
  const SuspensionFlow* suspension = nullptr;
  bool exact_leaves = false;       ///< closed-form stable/unstable leaves exist
  bool center_preserving = false;  ///< eval moves points along flow lines
};

class DynamicalSystem {
 public:
  virtual ~DynamicalSystem() = default;

  virtual SystemKind kind() const = 0;
  virtual int dimension() const = 0;
  virtual Point eval(const Point& p) const = 0;
  virtual Point eval_inverse(const Point& p) const = 0;
  virtual bool invertible() const { return true; }
  virtual Eigen::MatrixXd derivative(const Point& p) const = 0;
  virtual double distance(const Point& p, const Point& q) const = 0;

  virtual Point canonical(const Point& p) const = 0;
  virtual Vec3 chart_offset(const Point& origin, const Point& q) const = 0;
  virtual Point chart_point(const Point& origin, const Vec3& offset) const = 0;
  virtual Point sample(std::mt19937_64& rng) const = 0;

  virtual IndexLayout index_layout() const = 0;
  /// Index coordinates of p, plus the images of p under the identification
  /// whenever p lies within `margin` of a seam. Two points at distance ≤ r
  /// have images whose per-axis offsets are ≤ r when margin ≥ seam_margin(r).
  virtual void index_images(const Point& p, double margin, std::vector<Vec3>& out) const = 0;
  virtual double seam_margin(double radius) const { return radius; }

  virtual SystemTraits traits() const { return {}; }
  /// Flow time carried by one application of eval (center-preserving systems).
  virtual double center_time(const Point& p) const;

  /// The structured configuration block this handle was built from.
  virtual json config() const = 0;
};

using SystemHandle = std::shared_ptr<const DynamicalSystem>;

SystemHandle toral_map(ToralAutomorphism a);
SystemHandle toral_map(const IntMatrix& m);
/// x ↦ M·x mod 1 for an integer matrix with |det| ≥ 1; not invertible unless |det| = 1.
SystemHandle toral_endomorphism(const IntMatrix& m);
SystemHandle time_t_map(std::shared_ptr<const SuspensionFlow> flow, double t);
SystemHandle time_t_map(const SuspensionFlow& flow, double t);

// ---------------------------------------------------------------------------
// Perturbations of time-t maps

enum class ShearProfile { Sine, Bump };

/// a · P(s / roof(x)) · (1 + b·cos(2π kᵀx)), with P(u) = sin(2π m u) (Sine)
/// or sin²(π m u) (Bump). Both vanish on the identification seam.
struct ShearTerm {
  ShearProfile profile = ShearProfile::Sine;
  int mode = 1;
  double amplitude = 1.0;
  int k1 = 0;
  int k2 = 0;
  double modulation = 0.0;
};

/// Admissible perturbation families g_ε; the perturbed map is ref ∘ g_ε.
///  - center shear: (x, s) ↦ flow((x, s), ε·σ(x, s)), σ = Σ ShearTerm
///  - base shear:   (x, s) ↦ (x + ε·w·sin²(π s / c), s), constant roof c
struct PerturbationShape {
  enum class Kind { CenterShear, BaseShear };
  Kind kind = Kind::CenterShear;
  std::vector<ShearTerm> terms;
  std::array<double, 2> direction{1.0, 0.0};

  static PerturbationShape center_shear(std::vector<ShearTerm> terms);
  static PerturbationShape base_shear(std::array<double, 2> direction);

  double sigma(const Point& p, const Roof& roof) const;
  /// ∇σ in chart coordinates (∂/∂x₁, ∂/∂x₂, ∂/∂s).
  Vec3 sigma_gradient(const Point& p, const Roof& roof) const;
  /// Lipschitz bound of the displacement along the direction it acts in.
  double lipschitz(const Roof& roof) const;
  /// ε_max = 1 / lipschitz.
  double threshold(const Roof& roof) const;

  std::string id() const;
  json to_json() const;
  static PerturbationShape from_json(const json& j);
};

/// ref ∘ g_ε for a time-t reference handle. Throws AdmissibilityError when
/// ε ≥ ε_max or when the determinant grid check fails.
SystemHandle perturbed_map(const SystemHandle& reference, double epsilon,
                           const PerturbationShape& shape);

/// g_ε itself, its inverse and its chart Jacobian. The perturbed handle
/// evaluates ref(g_ε(p)).
Point shape_map(const SuspensionFlow& flow, double eps, const PerturbationShape& shape, const Point& p);
Point shape_map_inverse(const SuspensionFlow& flow, double eps, const PerturbationShape& shape,
                        const Point& q);
Eigen::Matrix3d shape_jacobian(const SuspensionFlow& flow, double eps, const PerturbationShape& shape,
                               const Point& p);

/// Minimum |det Dg_ε| over the 64³ verification grid.
double perturbation_min_determinant(const SuspensionFlow& flow, double epsilon,
                                    const PerturbationShape& shape, int grid = 64);

// ---------------------------------------------------------------------------
// Configuration

/// Builds a handle from a structured block:
///   {"kind": "toral"|"endomorphism", "matrix": [[..]]}
///   {"kind": "suspension"|"time_t", "matrix": .., "roof": {...}, "t": ..}
///   {"kind": "perturbed", "reference": {...}, "epsilon": .., "shape": {...}}
/// Unknown keys are rejected with an InputError naming them.
SystemHandle system_from_config(const json& config);

json point_to_json(const Point& p);
/// Array of coordinates; its length must equal the system dimension.
Point point_from_json(const json& j, int dim);

}  // namespace bowen
