#include <cmath>

#include "bowen/entropy.hpp"
#include "bowen/parallel.hpp"
#include "cell_index.hpp"

namespace bowen {

namespace {
constexpr std::size_t kMaxCloud = std::size_t{1} << 20;

std::vector<bool> periodic_axes(const IndexLayout& l) {
  std::vector<bool> out;
  for (int a = 0; a < l.dims; ++a) out.push_back(l.periodic[static_cast<std::size_t>(a)]);
  return out;
}
}  // namespace

SampleCloud grid_cloud(const DynamicalSystem& sys, int per_axis) {
  if (per_axis < 1) throw InputError("grid_cloud: per_axis must be >= 1");
  const int d = sys.dimension();
  const auto m = static_cast<std::size_t>(per_axis);
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) {
    total *= m;
    if (total > kMaxCloud) throw InputError("grid_cloud: more than 2^20 points requested");
  }
  SampleCloud cloud;
  cloud.provenance = "grid:" + std::to_string(per_axis) + "^" + std::to_string(d);
  cloud.points.reserve(total);
  const auto* susp = sys.traits().suspension;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    Point p;
    p.dim = d;
    for (int a = d - 1; a >= 0; --a) {
      p[a] = static_cast<double>(rest % m) / per_axis;
      rest /= m;
    }
    if (susp) p[2] *= susp->roof()(Point{p[0], p[1]});
    cloud.points.push_back(sys.canonical(p));
  }
  return cloud;
}

SampleCloud random_cloud(const DynamicalSystem& sys, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw InputError("random_cloud: count must be >= 1");
  if (count > kMaxCloud) throw InputError("random_cloud: more than 2^20 points requested");
  std::mt19937_64 rng(seed);
  std::vector<Point> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pts.push_back(sys.sample(rng));
  return make_cloud(sys, std::move(pts), "seed:" + std::to_string(seed));
}

SampleCloud make_cloud(const DynamicalSystem& sys, std::vector<Point> points, std::string provenance,
                       std::string restriction) {
  if (points.empty()) throw InputError("sample cloud must be nonempty");
  if (points.size() > kMaxCloud) throw InputError("sample cloud larger than 2^20 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim != sys.dimension())
      throw InputError("cloud point " + std::to_string(i) + " has the wrong dimension");
    if (!(sys.canonical(points[i]) == points[i]))
      throw InputError("cloud point " + std::to_string(i) + " is not canonical");
  }
  const double tol = 1e-12;
  detail::CellIndex index(periodic_axes(sys.index_layout()), tol);
  std::vector<Vec3> images;
  std::vector<std::uint64_t> keys;
  for (std::size_t i = 0; i < points.size(); ++i) {
    images.clear();
    sys.index_images(points[i], sys.seam_margin(tol), images);
    for (const auto& im : images) {
      index.neighbor_keys(im.data(), keys);
      for (auto k : keys)
        if (const auto* cell = index.find(k))
          for (auto j : *cell)
            if (sys.distance(points[i], points[j]) <= tol)
              throw InputError("cloud points " + std::to_string(j) + " and " + std::to_string(i) +
                               " coincide");
    }
    for (const auto& im : images) index.insert(index.key(im.data()), static_cast<std::uint32_t>(i));
  }
  SampleCloud c;
  c.points = std::move(points);
  c.provenance = std::move(provenance);
  c.restriction = std::move(restriction);
  return c;
}

double dn_distance(const DynamicalSystem& sys, const Point& x, const Point& y, int n) {
  if (n < 1) throw InputError("dn_distance: n must be >= 1");
  Point a = x, b = y;
  double d = sys.distance(a, b);
  for (int i = 1; i < n; ++i) {
    a = sys.eval(a);
    b = sys.eval(b);
    d = std::max(d, sys.distance(a, b));
  }
  return d;
}

OrbitTable orbit_table(const DynamicalSystem& sys, const SampleCloud& cloud, int n, int workers) {
  if (n < 1) throw InputError("orbit_table: n must be >= 1");
  OrbitTable t;
  t.count = cloud.size();
  t.n = n;
  t.data.resize(t.count * static_cast<std::size_t>(n));
  parallel_for(t.count, workers, [&](std::size_t i) {
    Point p = cloud.points[i];
    Point* row = &t.data[i * static_cast<std::size_t>(n)];
    row[0] = p;
    for (int k = 1; k < n; ++k) row[k] = p = sys.eval(p);
  });
  return t;
}

std::vector<std::uint32_t> seeded_order(std::size_t count, std::uint64_t seed) {
  std::vector<std::uint32_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = static_cast<std::uint32_t>(i);
  std::mt19937_64 rng(seed);
  for (std::size_t i = count; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace bowen
