#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace bowen {

inline constexpr int kMaxDim = 3;
using Vec3 = std::array<double, kMaxDim>;

/// Raw state of a model system. For torus maps the first `dim` entries are
/// coordinates in [0,1); for mapping-torus systems the layout is
/// (base₁, base₂, height). Unused entries stay zero so that equality of
/// canonical points is plain value equality.
struct Point {
  Vec3 x{};
  int dim = 0;

  Point() = default;
  Point(std::initializer_list<double> coords);
  explicit Point(std::span<const double> coords);

  double operator[](int i) const { return x[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return x[static_cast<std::size_t>(i)]; }

  friend bool operator==(const Point&, const Point&) = default;
};

/// Canonical representative of v in [0,1). Floor-subtraction, then the
/// rounding edge (result == 1.0) and negative zero are both mapped to 0.0.
double wrap_unit(double v);

/// Signed offset `to - from` reduced to the shortest lift in [-0.5, 0.5).
double wrapped_delta(double from, double to);

double norm(const Vec3& v, int dim);

/// Uniform double in [0,1) from the top 53 bits of one generator draw. Kept
/// independent of <random> distributions, whose output is implementation
/// defined, so that seeded runs agree across standard libraries.
double unit_double(std::mt19937_64& rng);

/// Uniform index in [0, n) by rejection on the raw generator output.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n);

/// Malformed input: wrong dimension, empty schedule, bad parameter.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A perturbation parameter outside the admissible range.
class AdmissibilityError : public std::domain_error {
 public:
  AdmissibilityError(const std::string& what, double threshold)
      : std::domain_error(what), threshold_(threshold) {}
  double threshold() const { return threshold_; }

 private:
  double threshold_;
};

/// An iterative construction that failed to settle.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_gap, int iterations)
      : std::runtime_error(what), last_gap_(last_gap), iterations_(iterations) {}
  double last_gap() const { return last_gap_; }
  int iterations() const { return iterations_; }

 private:
  double last_gap_;
  int iterations_;
};

/// A resource budget (vertex count) was exhausted.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, int reached_step)
      : std::runtime_error(what), reached_step_(reached_step) {}
  int reached_step() const { return reached_step_; }

 private:
  int reached_step_;
};

/// Points left the region where a local chart is valid.
class ChartError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bowen
