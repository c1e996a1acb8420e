#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "bowen/entropy.hpp"
#include "bowen/systems.hpp"

namespace testing {

inline const double kLogLambda = std::log((3.0 + std::sqrt(5.0)) / 2.0);

// |got - want| <= rel·|want|. doctest::Approx adds its scale of 1 to the
// tolerance, which doubles a 10% band around 1.
inline bool within_rel(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); }

inline bowen::IntMatrix cat() { return bowen::int_matrix({{2, 1}, {1, 1}}); }

inline bowen::SuspensionFlow cat_flow(double roof = 1.0) {
  return bowen::SuspensionFlow(bowen::ToralAutomorphism(cat()), bowen::Roof::constant(roof));
}

inline bowen::SuspensionFlow wavy_flow() {
  return bowen::SuspensionFlow(bowen::ToralAutomorphism(cat()), bowen::Roof(1.0, {{1, 0, 0.2}}));
}

inline bowen::PerturbationShape sine_shear() {
  using namespace bowen;
  return PerturbationShape::center_shear({ShearTerm{ShearProfile::Sine, 1, 1.0, 1, 0, 1.0}});
}

// The shear used by the acceptance runs: sine plus a seam-free bump.
inline bowen::PerturbationShape mixed_shear() {
  using namespace bowen;
  return PerturbationShape::center_shear(
      {ShearTerm{ShearProfile::Sine, 1, 1.0, 1, 0, 1.0}, ShearTerm{ShearProfile::Bump, 1, 0.5, 0, 1, 0.0}});
}

inline bowen::SystemHandle perturbed_cat(double eps, const bowen::PerturbationShape& shape = sine_shear()) {
  return bowen::perturbed_map(bowen::time_t_map(cat_flow(), 1.0), eps, shape);
}

// Exhaustive maximum (n, delta)-separated subset of a small cloud, as a bitmask.
inline std::uint32_t exhaustive_max(const bowen::DynamicalSystem& sys, const bowen::SampleCloud& cloud, int n, double delta) {
  const std::size_t m = cloud.size();
  std::vector<std::uint32_t> conflict(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && bowen::dn_distance(sys, cloud.points[i], cloud.points[j], n) <= delta) conflict[i] |= 1u << j;
  std::uint32_t best = 0;
  for (std::uint32_t s = 1; s < (1u << m); ++s) {
    if (std::popcount(s) <= std::popcount(best)) continue;
    bool ok = true;
    for (std::size_t i = 0; i < m && ok; ++i)
      if ((s >> i & 1u) && (conflict[i] & s)) ok = false;
    if (ok) best = s;
  }
  return best;
}

inline bool is_separated(const bowen::DynamicalSystem& sys, const bowen::SampleCloud& cloud, const bowen::SeparatedSet& s) {
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = a + 1; b < s.size(); ++b)
      if (bowen::dn_distance(sys, cloud.points[s.indices[a]], cloud.points[s.indices[b]], s.n) <= s.delta) return false;
  return true;
}

inline bool is_maximal(const bowen::DynamicalSystem& sys, const bowen::SampleCloud& cloud, const bowen::SeparatedSet& s) {
  std::vector<bool> in(cloud.size(), false);
  for (auto i : s.indices) in[i] = true;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (in[i]) continue;
    bool covered = false;
    for (auto j : s.indices)
      if (bowen::dn_distance(sys, cloud.points[i], cloud.points[j], s.n) <= s.delta) covered = true;
    if (!covered) return false;
  }
  return true;
}

}  // namespace testing
