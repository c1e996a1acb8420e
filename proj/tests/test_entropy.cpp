#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bowen/entropy.hpp"
#include "helpers.hpp"

using namespace bowen;
using testing::exhaustive_max;
using testing::is_maximal;
using testing::is_separated;

namespace {

SampleCloud toy_cloud(const DynamicalSystem& sys, std::size_t m, std::uint64_t seed) {
  return random_cloud(sys, m, seed);
}

}  // namespace

TEST_CASE("dn_distance basics") {
  const auto cat = toral_map(testing::cat());
  const Point x{0.3, 0.6}, y{0.31, 0.58};
  CHECK(dn_distance(*cat, x, x, 7) == 0.0);
  CHECK(dn_distance(*cat, x, y, 1) == cat->distance(x, y));
  double prev = 0.0;
  for (int n = 1; n <= 12; ++n) {
    const double d = dn_distance(*cat, x, y, n);
    CHECK(d >= prev);
    prev = d;
  }
  const auto id = toral_map(int_matrix({{1, 0}, {0, 1}}));
  for (int n : {1, 3, 9}) CHECK(dn_distance(*id, x, y, n) == id->distance(x, y));
}

TEST_CASE("dn_distance matches a five-step orbit table") {
  // Orbit of (0.001, 0) under [[2,1],[1,1]] by integer recurrence, no wrapping needed.
  const auto cat = toral_map(testing::cat());
  double a = 0.001, b = 0.0, oracle = 0.0;
  for (int i = 0; i < 5; ++i) {
    oracle = std::max(oracle, std::hypot(std::min(a, 1 - a), std::min(b, 1 - b)));
    const double na = 2 * a + b, nb = a + b;
    a = na;
    b = nb;
  }
  // Iterates: (0.001,0) (0.002,0.001) (0.005,0.003) (0.013,0.008) (0.034,0.021)
  CHECK(oracle == doctest::Approx(std::hypot(0.034, 0.021)).epsilon(1e-12));
  CHECK(dn_distance(*cat, Point{0.0, 0.0}, Point{0.001, 0.0}, 5) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("max_separated invariants and trivial cases") {
  const auto cat = toral_map(testing::cat());
  const SampleCloud cloud = grid_cloud(*cat, 24);
  for (int n : {1, 2, 4}) {
    for (double d : {0.2, 0.1}) {
      const SeparatedSet s = max_separated(*cat, cloud, n, d, 3);
      CHECK(is_separated(*cat, cloud, s));
      CHECK(is_maximal(*cat, cloud, s));
    }
  }
  CHECK(max_separated(*cat, cloud, 1, 1.0, 1).size() == 1);
  CHECK_THROWS_AS(max_separated(*cat, cloud, 1, 0.0, 1), InputError);
  CHECK_THROWS_AS(min_spanning_greedy(*cat, cloud, 1, -1.0), InputError);
  CHECK(min_spanning_greedy(*cat, cloud, 1, 1.0) == 1);
  const SampleCloud one = make_cloud(*cat, {Point{0.2, 0.2}}, "single");
  CHECK(min_spanning_greedy(*cat, one, 3, 0.01) == 1);
}

TEST_CASE("sample clouds are validated") {
  const auto cat = toral_map(testing::cat());
  CHECK_THROWS_AS(make_cloud(*cat, {}, "empty"), InputError);
  CHECK_THROWS_AS(make_cloud(*cat, {Point{0.2, 0.2}, Point{0.2, 0.2}}, "dup"), InputError);
  CHECK_THROWS_AS(make_cloud(*cat, {Point{1.2, 0.2}}, "raw"), InputError);
  const SampleCloud g = grid_cloud(*cat, 16);
  CHECK(g.size() == 256);
  const SampleCloud r1 = random_cloud(*cat, 100, 9), r2 = random_cloud(*cat, 100, 9);
  CHECK(r1.points == r2.points);
}

TEST_CASE("identity circle grid sits in the separated/spanning sandwich") {
  // On 100 points spaced 0.01 a ball of radius 0.0505 holds 11 consecutive
  // points and one of radius 0.02525 holds 5, so the minimal spanning counts
  // are b(delta) = ceil(100/11) = 10 and b(delta/2) = 20.
  const auto id = toral_endomorphism(int_matrix({{1}}));
  const SampleCloud circle = grid_cloud(*id, 100);
  REQUIRE(circle.size() == 100);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const std::size_t a = max_separated(*id, circle, 3, 0.0505, seed).size();
    CHECK(a >= 10);
    CHECK(a <= 20);
    CHECK(min_spanning_greedy(*id, circle, 3, 0.0505) >= 10);
  }
  // Greedy in index order against a brute-force pass on integer grid gaps.
  std::vector<std::uint32_t> order(100);
  std::iota(order.begin(), order.end(), 0u);
  std::vector<int> picked;
  for (int i = 0; i < 100; ++i) {
    bool ok = true;
    for (int j : picked) ok = ok && std::min(std::abs(i - j), 100 - std::abs(i - j)) > 5;
    if (ok) picked.push_back(i);
  }
  const OrbitTable table = orbit_table(*id, circle, 3);
  CHECK(max_separated(*id, table, 3, 0.055, order).size() == picked.size());
  CHECK(picked.size() == 16);
}

TEST_CASE("brute-force equivalence on small clouds") {
  const auto cat = toral_map(testing::cat());
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const SampleCloud cloud = toy_cloud(*cat, 9 + seed, seed);
    const OrbitTable table = orbit_table(*cat, cloud, 4, 1);
    std::size_t prev_n = 0;
    for (int n = 1; n <= 4; ++n) {
      std::size_t prev_d = 0;
      for (double d : {0.4, 0.3, 0.2}) {
        const std::uint32_t best = exhaustive_max(*cat, cloud, n, d);
        const auto best_size = static_cast<std::size_t>(std::popcount(best));
        // Exhaustive a(n, delta) is monotone in delta (fixed n)...
        CHECK(best_size >= prev_d);
        prev_d = best_size;
        for (std::uint64_t os = 0; os < 5; ++os) {
          const SeparatedSet g = max_separated(*cat, cloud, n, d, os);
          CHECK(is_separated(*cat, cloud, g));
          CHECK(is_maximal(*cat, cloud, g));
          CHECK(2 * g.size() >= best_size);
          CHECK(g.size() <= best_size);
        }
        // Offering the exhaustive optimum first makes the greedy pass return it.
        std::vector<std::uint32_t> prefix;
        for (std::uint32_t i = 0; i < cloud.size(); ++i)
          if (best >> i & 1u) prefix.push_back(i);
        const SeparatedSet exact = max_separated(*cat, table, n, d, seeded_order(cloud.size(), 0), prefix);
        CHECK(exact.size() == best_size);
      }
      // ...and in n (fixed delta).
      const auto at_n = static_cast<std::size_t>(std::popcount(exhaustive_max(*cat, cloud, n, 0.2)));
      CHECK(at_n >= prev_n);
      prev_n = at_n;
    }
  }
}

TEST_CASE("greedy spanning at 2 delta never exceeds separated at delta") {
  const auto cat = toral_map(testing::cat());
  // Eight greedy orders on a 12-point toy cloud, then one grid case.
  const SampleCloud toy = toy_cloud(*cat, 12, 77);
  for (int n = 1; n <= 4; ++n)
    for (double d : {0.05, 0.1, 0.2, 0.3})
      for (std::uint64_t os = 0; os < 8; ++os)
        CHECK(min_spanning_greedy(*cat, toy, n, 2 * d) <= max_separated(*cat, toy, n, d, os).size());

  const SampleCloud grid = grid_cloud(*cat, 64);
  CHECK(min_spanning_greedy(*cat, grid, 6, 0.2) <= max_separated(*cat, grid, 6, 0.1, 1).size());
}

TEST_CASE("determinism across worker counts") {
  const auto sys = time_t_map(testing::cat_flow(), 1.0);
  const SampleCloud cloud = random_cloud(*sys, 3000, 4);
  EstimatorOptions o1, o4;
  o1.workers = 1;
  o4.workers = 4;
  o1.with_spanning = o4.with_spanning = true;
  const auto a = entropy_estimate(*sys, cloud, {1, 2, 3, 4}, {0.2, 0.1}, 8, o1);
  const auto b = entropy_estimate(*sys, cloud, {1, 2, 3, 4}, {0.2, 0.1}, 8, o4);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.counts_csv() == b.counts_csv());
  const auto s1 = max_separated(*sys, cloud, 3, 0.1, 5, 1);
  const auto s3 = max_separated(*sys, cloud, 3, 0.1, 5, 3);
  CHECK(s1.indices == s3.indices);
}

TEST_CASE("estimate count tables are monotone and sandwiched") {
  const auto cat = toral_map(testing::cat());
  const SampleCloud cloud = grid_cloud(*cat, 64);
  EstimatorOptions opt;
  opt.with_spanning = true;
  const auto est = entropy_estimate(*cat, cloud, {1, 2, 3, 4, 5, 6}, {0.2, 0.1, 0.05}, 1, opt);
  CHECK(est.delta_monotone);
  CHECK(est.n_monotone);
  const OrbitTable table = orbit_table(*cat, cloud, 6, 1);
  for (const auto& row : est.counts) {
    if (row.saturated) {
      // Skipped in the table; the cover still fits under the cloud size.
      CHECK(row.spanning_2delta == -1);
      CHECK(min_spanning_greedy(*cat, table, row.n, 2 * row.delta) <= row.count);
      continue;
    }
    CHECK(row.spanning_2delta >= 1);
    CHECK(static_cast<std::size_t>(row.spanning_2delta) <= row.count);
  }
  for (int n = 1; n <= 6; ++n) {
    CHECK(est.count(n, 0.1) >= est.count(n, 0.2));
    CHECK(est.count(n, 0.05) >= est.count(n, 0.1));
    if (n > 1) CHECK(est.count(n, 0.05) >= est.count(n - 1, 0.05));
  }
}

TEST_CASE("identity map has rate zero") {
  const auto id = toral_map(int_matrix({{1, 0}, {0, 1}}));
  const auto est = entropy_estimate(*id, grid_cloud(*id, 32), {1, 2, 3, 4}, {0.2, 0.1}, 1);
  CHECK(est.rate == 0.0);
  CHECK(est.slope_stderr == 0.0);
}

TEST_CASE("saturation is flagged and excluded from the fit") {
  const auto cat = toral_map(testing::cat());
  // 24² grid: saturates part way through the schedule at delta = 0.1.
  const SampleCloud cloud = grid_cloud(*cat, 24);
  const auto est = entropy_estimate(*cat, cloud, {1, 2, 3, 4, 5, 6, 7, 8}, {0.2, 0.1}, 1);
  CHECK(est.saturated);
  int seen = 0;
  for (const auto& row : est.counts) {
    CHECK(row.saturated == (row.count == cloud.size()));
    if (row.delta == 0.1 && row.saturated) {
      ++seen;
      CHECK(row.n > est.fit_window[1]);
    }
  }
  CHECK(seen > 0);
  CHECK(est.fit_window[1] >= est.fit_window[0] + 1);

  // Fully saturated: empty window and rate 0.
  const auto all = entropy_estimate(*cat, grid_cloud(*cat, 12), {1, 2, 3}, {0.05}, 1);
  CHECK(all.saturated);
  CHECK(all.rate == 0.0);
  CHECK(all.fit_window == std::array<int, 2>{0, 0});
}

TEST_CASE("order robustness over five seeds") {
  const auto cat = toral_map(testing::cat());
  const SampleCloud cloud = grid_cloud(*cat, 128);
  std::vector<double> rates;
  std::vector<std::size_t> counts;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto est = entropy_estimate(*cat, cloud, {1, 2, 3, 4, 5, 6}, {0.2, 0.1}, seed);
    rates.push_back(est.rate);
    counts.push_back(est.count(5, 0.1));
  }
  CHECK(*std::max_element(counts.begin(), counts.end()) <= 2 * *std::min_element(counts.begin(), counts.end()));
  CHECK(*std::max_element(rates.begin(), rates.end()) - *std::min_element(rates.begin(), rates.end()) <= 0.05);
}

// Expected to fail on a 256² grid: counts near the cloud size stop growing
// (see README).
TEST_CASE("conflict: cat map separated counts grow by lambda per step") {
  const auto cat = toral_map(testing::cat());
  const SampleCloud cloud = grid_cloud(*cat, 256);
  const auto est = entropy_estimate(*cat, cloud, {4, 5, 6, 7, 8, 9, 10}, {0.1}, 1);
  const double target = std::exp(testing::kLogLambda);
  for (int n = 4; n < 10; ++n) {
    const double ratio = double(est.count(n + 1, 0.1)) / double(est.count(n, 0.1));
    CHECK_MESSAGE(std::abs(ratio - target) <= 0.15 * target, "n = " << n << " ratio " << ratio);
  }
}

TEST_CASE("line fit and window selection") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{1, 3, 5, 7, 9};
  const LineFit f = fit_line(x, y, 0, 4);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(-1.0));
  CHECK(f.slope_stderr == doctest::Approx(0.0).epsilon(1e-12));

  const std::vector<int> ns{1, 2, 3, 4, 5, 6};
  std::vector<std::size_t> counts;
  for (int n : ns) counts.push_back(static_cast<std::size_t>(std::round(3 * std::exp(0.7 * n))));
  const WindowFit w = fit_growth_window(ns, counts, std::vector<bool>(ns.size(), false), EstimatorOptions{});
  CHECK(testing::within_rel(w.fit.slope, 0.7, 0.01));
  CHECK(w.n_min == 1);
  CHECK(w.n_max == 6);
  const WindowFit flat = fit_growth_window(ns, std::vector<std::size_t>(6, 4), std::vector<bool>(6, false), {});
  CHECK(flat.fit.slope == 0.0);
}
