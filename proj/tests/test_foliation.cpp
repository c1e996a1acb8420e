#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bowen/foliation.hpp"
#include "helpers.hpp"

using namespace bowen;

namespace {

double emax_sine() { return testing::sine_shear().threshold(Roof::constant(1.0)); }

double invariance_error(const DynamicalSystem& sys, const Point& x, double radius, double spacing,
                        const FoliationConfig& cfg) {
  const LeafSegment u = unstable_segment(sys, x, radius, spacing, cfg);
  FoliationConfig tight = cfg;
  tight.gt_tol = 1e-9;
  const LeafSegment image = unstable_segment(sys, sys.eval(x), 3.0 * radius, spacing / 8.0, tight);
  double worst = 0.0;
  for (const auto& v : u.points) worst = std::max(worst, distance_to_segment(sys, image, sys.eval(v)));
  return worst;
}

}  // namespace

TEST_CASE("cat map unstable segment through the origin") {
  const auto cat = toral_map(testing::cat());
  const Point o{0.0, 0.0};
  const LeafSegment seg = unstable_segment(*cat, o, 0.1, 0.01);
  CHECK(seg.kind == LeafKind::Unstable);
  CHECK(seg.length() == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(seg.arc.front() == 0.0);
  // (1, (√5−1)/2) normalised
  const double vx = 0.8506508083520400, vy = 0.5257311121191336;
  const Vec3 step = cat->chart_offset(seg.points[seg.anchor], seg.points[seg.anchor + 1]);
  const double len = norm(step, 2);
  CHECK(std::abs(step[0] / len) == doctest::Approx(vx).epsilon(1e-9));
  CHECK(std::abs(step[1] / len) == doctest::Approx(vy).epsilon(1e-9));
  for (std::size_t i = 0; i < seg.points.size(); ++i) {
    const Vec3 off = cat->chart_offset(o, seg.points[i]);
    CHECK(std::abs(off[0] * vy - off[1] * vx) < 1e-9);
    if (i) {
      CHECK(seg.arc[i] > seg.arc[i - 1]);
      CHECK(cat->distance(seg.points[i - 1], seg.points[i]) <= seg.spacing_bound + 1e-15);
    }
  }
}

TEST_CASE("radius zero gives a single point") {
  const auto cat = toral_map(testing::cat());
  const LeafSegment seg = unstable_segment(*cat, Point{0.3, 0.4}, 0.0, 0.01);
  CHECK(seg.points.size() == 1);
  CHECK(seg.length() == 0.0);
  const auto sys = time_t_map(testing::cat_flow(), 1.0);
  CHECK(center_segment(*sys, Point{0.3, 0.4, 0.5}, 0.0, 0.01).points.size() == 1);
}

TEST_CASE("stable segments contract under the map") {
  const auto cat = toral_map(testing::cat());
  const Point x{0.2, 0.7};
  const LeafSegment s = stable_segment(*cat, x, 0.05, 0.005);
  const double lam = cat->traits().linear->unstable_eigenvalue();
  for (const auto& v : s.points)
    CHECK(cat->distance(cat->eval(v), cat->eval(x)) == doctest::Approx(cat->distance(v, x) / lam).epsilon(1e-8));
}

TEST_CASE("unperturbed leaves are recovered at epsilon zero") {
  const auto ref = time_t_map(testing::cat_flow(), 1.0);
  const auto zero = testing::perturbed_cat(0.0);
  const Point x{0.3, 0.2, 0.4};
  const LeafSegment exact = unstable_segment(*ref, x, 0.05, 0.005);
  const LeafSegment gt = unstable_segment(*zero, x, 0.05, 0.005);
  double worst = 0.0;
  for (const auto& p : gt.points) worst = std::max(worst, distance_to_segment(*ref, exact, p));
  CHECK(worst < 1e-7);
}

TEST_CASE("leaf invariance") {
  FoliationConfig cfg;
  const Point x{0.3, 0.2, 0.4};
  CHECK(invariance_error(*toral_map(testing::cat()), Point{0.3, 0.2}, 0.05, 0.005, cfg) < 1e-7);
  CHECK(invariance_error(*time_t_map(testing::wavy_flow(), 1.0), x, 0.05, 0.005, cfg) < 1e-7);
  CHECK(invariance_error(*testing::perturbed_cat(0.03), x, 0.05, 0.005, cfg) < 1e-7);
  CHECK(invariance_error(*testing::perturbed_cat(emax_sine() / 2), x, 0.05, 0.005, cfg) < 1e-7);
}

TEST_CASE("graph transform gaps contract over every two steps") {
  // Single gaps can dip when the shear gradient along the seed nearly vanishes
  // at that depth, so the envelope is taken over consecutive pairs.
  for (double eps : {0.03, emax_sine() / 2}) {
    const auto sys = testing::perturbed_cat(eps);
    FoliationConfig cfg;
    cfg.gt_tol = 1e-11;
    const LeafSegment seg = unstable_segment(*sys, Point{0.3, 0.2, 0.4}, 0.05, 0.005, cfg);
    REQUIRE(seg.gaps.size() >= 4);
    int tested = 0;
    for (std::size_t k = 0; k + 2 < seg.gaps.size(); ++k) {
      const double envelope = std::max(seg.gaps[k], seg.gaps[k + 1]);
      if (envelope < 1e-13) break;
      ++tested;
      CHECK_MESSAGE(seg.gaps[k + 2] <= 0.9 * envelope, "step " << k + 2 << " gap " << seg.gaps[k + 2]);
    }
    CHECK(tested >= 3);
  }
}

TEST_CASE("graph transform reports failure to converge") {
  const auto sys = testing::perturbed_cat(0.03);
  FoliationConfig cfg;
  cfg.gt_tol = 1e-30;
  cfg.gt_max_iter = 5;
  try {
    unstable_segment(*sys, Point{0.3, 0.2, 0.4}, 0.05, 0.005, cfg);
    FAIL("converged to 1e-30");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_gap() > 0.0);
    CHECK(e.iterations() == 5);
  }
}

TEST_CASE("center interval of the unit roof time-one map") {
  const auto sys = time_t_map(testing::cat_flow(), 1.0);
  const LeafSegment I = center_interval(*sys, Point{0.0, 0.0, 0.0}, 0.01);
  CHECK(I.kind == LeafKind::Center);
  CHECK(I.length() == doctest::Approx(1.0).epsilon(1e-12));
  const LeafSegment c = center_segment(*sys, Point{0.1, 0.2, 0.3}, 0.7, 0.05);
  CHECK(c.length() == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("center intervals are uniformly bounded at half the threshold") {
  const auto sys = testing::perturbed_cat(emax_sine() / 2);
  const FoliationConfig cfg;
  std::mt19937_64 rng(13);
  double lo = 1e9, hi = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double len = center_interval(*sys, sys->sample(rng), 0.05).length();
    lo = std::min(lo, len);
    hi = std::max(hi, len);
  }
  CHECK(lo >= cfg.K1);
  CHECK(hi <= cfg.K2);
  CHECK(lo < 1.0);
  CHECK(hi > 1.0);
}

TEST_CASE("holonomy along a trivial center arc is the identity") {
  const auto sys = testing::perturbed_cat(0.03);
  const Point x{0.3, 0.2, 0.4};
  // Inputs must sit on the leaf more accurately than the tolerance checked.
  FoliationConfig tight;
  tight.gt_tol = 1e-11;
  const LeafSegment u = unstable_segment(*sys, x, 0.05, 0.005, tight);
  const HolonomyResult h = center_holonomy(*sys, x, x, u.points, 2);
  for (std::size_t i = 0; i < u.points.size(); ++i) CHECK(sys->distance(h.images[i], u.points[i]) < 1e-10);
}

TEST_CASE("holonomy in the product model is a flow translation") {
  const auto fl = std::make_shared<const SuspensionFlow>(testing::cat_flow());
  const auto sys = time_t_map(fl, 1.0);
  const Point x{0.3, 0.2, 0.4};
  const LeafSegment u = unstable_segment(*sys, x, 0.05, 0.005);
  for (double c : {0.3, -0.45, 0.8}) {
    const Point y = fl->flow(x, c);
    const HolonomyResult h = center_holonomy(*sys, x, y, u.points, 2);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.points.size(); ++i)
      worst = std::max(worst, sys->distance(h.images[i], fl->flow(u.points[i], c)));
    CHECK(worst < 1e-9);
    for (double off : h.center_offsets) CHECK(off == doctest::Approx(c).epsilon(1e-9));
  }
}

TEST_CASE("holonomy depth consistency, equivariance and leaf membership") {
  const auto sys = testing::perturbed_cat(emax_sine() / 2);
  const SuspensionFlow& fl = *sys->traits().suspension;
  const Point x{0.3, 0.2, 0.4};
  const Point y = fl.flow(x, 0.3);
  const LeafSegment u = unstable_segment(*sys, x, 0.05, 0.005);
  const HolonomyResult a = center_holonomy(*sys, x, y, u.points, 2);
  const HolonomyResult b = center_holonomy(*sys, x, y, u.points, 3);
  double consistency = 0.0;
  for (std::size_t i = 0; i < a.images.size(); ++i)
    consistency = std::max(consistency, sys->distance(a.images[i], b.images[i]));
  CHECK(consistency <= 1e-7);

  std::vector<Point> pushed;
  for (const auto& z : u.points) pushed.push_back(sys->eval(z));
  const HolonomyResult e = center_holonomy(*sys, sys->eval(x), sys->eval(y), pushed, 3);
  double equivariance = 0.0;
  for (std::size_t i = 0; i < a.images.size(); ++i)
    equivariance = std::max(equivariance, sys->distance(sys->eval(a.images[i]), e.images[i]));
  CHECK(equivariance <= 1e-6);

  FoliationConfig tight;
  tight.gt_tol = 1e-9;
  const LeafSegment wy = unstable_segment(*sys, y, 0.15, 0.0005, tight);
  double off_leaf = 0.0;
  for (const auto& p : a.images) off_leaf = std::max(off_leaf, distance_to_segment(*sys, wy, p));
  CHECK(off_leaf <= 1e-7);
}

TEST_CASE("holonomy refuses points outside the chart") {
  const auto sys = testing::perturbed_cat(0.03);
  const Point x{0.3, 0.2, 0.4};
  const LeafSegment far = unstable_segment(*sys, x, 0.4, 0.04);
  CHECK_THROWS_AS(center_holonomy(*sys, x, sys->traits().suspension->flow(x, 0.3), far.points, 1), ChartError);
}

TEST_CASE("holonomy bounds shrink with the radius") {
  for (double eps : {0.0, emax_sine() / 2}) {
    const auto sys = testing::perturbed_cat(eps);
    const Point x{0.3, 0.2, 0.4};
    const Point y = sys->traits().suspension->flow(x, 0.3);
    const auto bounds = holonomy_bounds(*sys, x, y, {0.04, 0.02, 0.01}, 2);
    REQUIRE(bounds.size() == 3);
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      CHECK(bounds[i].c1 > 0.0);
      CHECK(bounds[i].c1 <= bounds[i].c2);
      CHECK(std::isfinite(bounds[i].c2));
      if (i) {
        CHECK(bounds[i].c1 < bounds[i - 1].c1);
        CHECK(bounds[i].c2 < bounds[i - 1].c2);
      }
    }
    if (eps == 0.0)
      for (const auto& b : bounds) {
        CHECK(b.c1 == doctest::Approx(b.radius).epsilon(1e-9));
        CHECK(b.c2 == doctest::Approx(b.radius).epsilon(1e-9));
      }
  }
}

TEST_CASE("center non-expansion on unperturbed suspensions") {
  const auto flat = time_t_map(testing::cat_flow(), 1.0);
  const NonexpansionReport a = center_nonexpansion_check(*flat, 200, 50, 1);
  CHECK(a.max_ratio_forward == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.max_ratio_backward == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.pass);

  const auto wavy = time_t_map(testing::wavy_flow(), 1.0);
  const NonexpansionReport b = center_nonexpansion_check(*wavy, 200, 50, 1);
  CHECK(b.max_ratio_forward <= 1.2 / 0.8);
  CHECK(b.max_ratio_backward <= 1.2 / 0.8);
}

TEST_CASE("center non-expansion report agrees with its bound") {
  const auto sys = testing::perturbed_cat(0.03);
  const FoliationConfig cfg;
  const NonexpansionReport r = center_nonexpansion_check(*sys, 50, 50, 2, cfg);
  CHECK(r.bound == doctest::Approx(cfg.K2 / cfg.K1));
  CHECK(r.pass == (std::max(r.max_ratio_forward, r.max_ratio_backward) <= r.bound));
  CHECK(r.max_ratio_forward >= 1.0);
  CHECK(r.samples == 50);
  CHECK(r.horizon == 50);
}

TEST_CASE("product boxes") {
  const auto flat = time_t_map(testing::cat_flow(), 1.0);
  const Point x{0.3, 0.2, 0.4};
  const ProductBox one = build_product_box(*flat, x, 0.05, 1);
  REQUIRE(one.a_samples.size() == 1);
  CHECK(flat->distance(one.a_samples[0], x) < 1e-15);

  const ProductBox box = build_product_box(*flat, x, 0.05, 5);
  CHECK(box.a_samples.size() == 25);
  CHECK(box.reconstruction_error < 1e-12);
  // The exact coordinate rectangle (u, c) ↦ x + u·vᵘ + c·∂s.
  const Vec3 vu = flat->traits().linear->unstable_direction();
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double u = -0.05 + 0.025 * i, c = -0.05 + 0.025 * j;
      const Point expect = flat->chart_point(x, Vec3{u * vu[0], u * vu[1], c});
      CHECK(flat->distance(box.a_samples[static_cast<std::size_t>(5 * i + j)], expect) < 1e-12);
    }

  const auto pert = testing::perturbed_cat(emax_sine() / 2);
  const ProductBox pb = build_product_box(*pert, x, 0.05, 5);
  CHECK(pb.a_samples.size() == 25);
  CHECK(pb.reconstruction_error <= 1e-8);
  CHECK(pb.d_samples.size() == 25 * 5);
  CHECK_THROWS_AS(build_product_box(*pert, x, 0.2, 5), InputError);
}

TEST_CASE("density check") {
  const auto sys = time_t_map(testing::cat_flow(), 1.0);
  const Point x{0.3, 0.2, 0.4};
  const SampleCloud just_x = make_cloud(*sys, {x}, "x");
  CHECK(density_check(*sys, x, 1.0, 1.0, just_x).covering_radius == doctest::Approx(0.0).epsilon(1e-12));

  const SampleCloud probes = grid_cloud(*sys, 10);
  double prev = 1e9;
  for (double L : {1.0, 2.0, 4.0}) {
    const DensityReport r = density_check(*sys, x, 1.0, L, probes);
    CHECK(r.covering_radius <= prev);
    CHECK(r.pass == (r.covering_radius <= FoliationConfig{}.gamma));
    prev = r.covering_radius;
  }
}
