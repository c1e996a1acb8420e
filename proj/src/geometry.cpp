#include "bowen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bowen {

Point::Point(std::initializer_list<double> coords)
    : Point(std::span<const double>(coords.begin(), coords.size())) {}

Point::Point(std::span<const double> coords) {
  if (coords.empty() || coords.size() > static_cast<std::size_t>(kMaxDim))
    throw InputError("point dimension must be in [1, 3], got " + std::to_string(coords.size()));
  dim = static_cast<int>(coords.size());
  std::copy(coords.begin(), coords.end(), x.begin());
}

double wrap_unit(double v) {
  double r = v - std::floor(v);
  if (r >= 1.0) r = 0.0;
  if (r == 0.0) r = 0.0;  // drops the sign of -0.0
  return r;
}

double wrapped_delta(double from, double to) {
  double d = to - from;
  d -= std::floor(d + 0.5);
  return d;
}

double norm(const Vec3& v, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
  return std::sqrt(s);
}

double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - (std::numeric_limits<std::uint64_t>::max() % n);
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

}  // namespace bowen
