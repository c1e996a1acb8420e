#include <algorithm>

#include "bowen/entropy.hpp"
#include "bowen/parallel.hpp"
#include "cell_index.hpp"

namespace bowen {

namespace {

using Key = std::array<double, detail::CellIndex::kMaxAxes>;

// Keys a table row on iterate n-1 (all seam images), prefixed by iterate 0
// when the space is a low-dimensional torus. A conflicting pair is close at
// both iterates, so it always shares a neighbouring cell.
class RowKeyer {
 public:
  RowKeyer(const DynamicalSystem& sys, const OrbitTable& table, int n, double radius)
      : sys_(sys), table_(table), n_(n), margin_(sys.seam_margin(radius)) {
    const auto layout = sys.index_layout();
    dims_ = layout.dims;
    bool all_periodic = true;
    for (int a = 0; a < dims_; ++a) all_periodic = all_periodic && layout.periodic[static_cast<std::size_t>(a)];
    both_ = all_periodic && dims_ <= 2 && n > 1;
    std::vector<bool> periodic;
    for (int rep = 0; rep < (both_ ? 2 : 1); ++rep)
      for (int a = 0; a < dims_; ++a) periodic.push_back(layout.periodic[static_cast<std::size_t>(a)]);
    index_ = std::make_unique<detail::CellIndex>(periodic, radius);
  }

  void images(std::uint32_t i, std::vector<Key>& out) {
    out.clear();
    scratch_.clear();
    sys_.index_images(table_.at(i, n_ - 1), margin_, scratch_);
    const Point& first = table_.at(i, 0);
    for (const auto& im : scratch_) {
      Key k{};
      int a = 0;
      if (both_)
        for (int d = 0; d < dims_; ++d) k[static_cast<std::size_t>(a++)] = first[d];
      for (int d = 0; d < dims_; ++d) k[static_cast<std::size_t>(a++)] = im[static_cast<std::size_t>(d)];
      out.push_back(k);
    }
  }

  detail::CellIndex& index() { return *index_; }

 private:
  const DynamicalSystem& sys_;
  const OrbitTable& table_;
  int n_;
  double margin_;
  int dims_ = 0;
  bool both_ = false;
  std::unique_ptr<detail::CellIndex> index_;
  std::vector<Vec3> scratch_;
};

bool within(const DynamicalSystem& sys, const OrbitTable& t, std::uint32_t i, std::uint32_t j, int n,
            double delta) {
  for (int k = n - 1; k >= 0; --k)
    if (sys.distance(t.at(i, k), t.at(j, k)) > delta) return false;
  return true;
}

void check_args(const OrbitTable& table, int n, double delta) {
  if (!(delta > 0.0)) throw InputError("delta must be > 0");
  if (n < 1 || n > table.n)
    throw InputError("n = " + std::to_string(n) + " outside the orbit table (1.." + std::to_string(table.n) + ")");
  if (table.count == 0) throw InputError("sample cloud must be nonempty");
}

}  // namespace

SeparatedSet max_separated(const DynamicalSystem& sys, const OrbitTable& table, int n, double delta,
                           const std::vector<std::uint32_t>& order, const std::vector<std::uint32_t>& prefix) {
  check_args(table, n, delta);
  RowKeyer keyer(sys, table, n, delta);
  auto& index = keyer.index();
  std::vector<char> taken(table.count, 0);
  std::vector<std::uint32_t> stamp(table.count, 0);
  std::uint32_t current = 0;
  std::vector<Key> imgs;
  std::vector<std::uint64_t> keys;

  SeparatedSet out;
  out.n = n;
  out.delta = delta;

  auto offer = [&](std::uint32_t i) {
    if (taken[i]) return;
    keyer.images(i, imgs);
    ++current;
    for (const auto& im : imgs) {
      index.neighbor_keys(im.data(), keys);
      for (auto k : keys) {
        const auto* cell = index.find(k);
        if (!cell) continue;
        for (auto j : *cell) {
          if (stamp[j] == current) continue;
          stamp[j] = current;
          if (within(sys, table, i, j, n, delta)) return;
        }
      }
    }
    taken[i] = 1;
    out.indices.push_back(i);
    for (const auto& im : imgs) index.insert(index.key(im.data()), i);
  };

  for (auto i : prefix) {
    if (i >= table.count) throw InputError("prefix index out of range");
    offer(i);
  }
  for (auto i : order) offer(i);
  return out;
}

SeparatedSet max_separated(const DynamicalSystem& sys, const SampleCloud& cloud, int n, double delta,
                           std::uint64_t order_seed, int workers) {
  if (!(delta > 0.0)) throw InputError("delta must be > 0");
  const OrbitTable table = orbit_table(sys, cloud, n, workers);
  return max_separated(sys, table, n, delta, seeded_order(cloud.size(), order_seed));
}

std::size_t min_spanning_greedy(const DynamicalSystem& sys, const OrbitTable& table, int n, double delta) {
  check_args(table, n, delta);
  const auto count = static_cast<std::uint32_t>(table.count);
  RowKeyer keyer(sys, table, n, delta);
  auto& index = keyer.index();
  std::vector<Key> imgs;
  std::vector<std::uint64_t> keys;
  for (std::uint32_t i = 0; i < count; ++i) {
    keyer.images(i, imgs);
    for (const auto& im : imgs) index.insert(index.key(im.data()), i);
  }

  // Balls are enumerated on demand: at coarse radii each one holds a large
  // fraction of the cloud.
  std::vector<std::uint32_t> stamp(count, 0);
  std::uint32_t generation = 0;
  auto for_ball = [&](std::uint32_t i, auto&& fn) {
    ++generation;
    keyer.images(i, imgs);
    for (const auto& im : imgs) {
      index.neighbor_keys(im.data(), keys);
      for (auto k : keys) {
        const auto* cell = index.find(k);
        if (!cell) continue;
        for (auto j : *cell) {
          if (stamp[j] == generation) continue;
          stamp[j] = generation;
          if (within(sys, table, i, j, n, delta)) fn(j);
        }
      }
    }
  };

  // Index-order cover: the first uncovered point becomes a center. Centers
  // are then pairwise more than delta apart, which is what the sandwich
  // against separated counts needs. A max-gain cover would have to size every
  // ball up front, which is quadratic at coarse radii.
  std::vector<char> covered(count, 0);
  std::size_t centers = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    if (covered[i]) continue;
    ++centers;
    covered[i] = 1;
    for_ball(i, [&](std::uint32_t j) { covered[j] = 1; });
  }
  return centers;
}

std::size_t min_spanning_greedy(const DynamicalSystem& sys, const SampleCloud& cloud, int n, double delta,
                                int workers) {
  if (!(delta > 0.0)) throw InputError("delta must be > 0");
  return min_spanning_greedy(sys, orbit_table(sys, cloud, n, workers), n, delta);
}

}  // namespace bowen
