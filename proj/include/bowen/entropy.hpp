#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bowen/systems.hpp"

namespace bowen {

/// Finite stand-in for the set K whose entropy is estimated.
struct SampleCloud {
  std::vector<Point> points;
  std::string provenance;           // "grid:256^2", "seed:42", ...
  std::string restriction = "whole";  // whole | leaf | box
  std::size_t size() const { return points.size(); }
};

/// Regular grid with `per_axis` points along each axis of the state space
/// (base × height fraction for mapping-torus systems). Total size is capped
/// at 2^20 points.
SampleCloud grid_cloud(const DynamicalSystem& sys, int per_axis);
SampleCloud random_cloud(const DynamicalSystem& sys, std::size_t count, std::uint64_t seed);
/// Validates that the points are canonical and pairwise distinct (tolerance 1e-12).
SampleCloud make_cloud(const DynamicalSystem& sys, std::vector<Point> points, std::string provenance,
                       std::string restriction = "whole");

double dn_distance(const DynamicalSystem& sys, const Point& x, const Point& y, int n);

/// Iterates f^0 … f^{n-1} of every cloud point, row-major by point.
struct OrbitTable {
  std::size_t count = 0;
  int n = 0;
  std::vector<Point> data;
  const Point& at(std::size_t i, int k) const { return data[i * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)]; }
};

OrbitTable orbit_table(const DynamicalSystem& sys, const SampleCloud& cloud, int n, int workers = 0);

/// Seed-keyed permutation of 0..count-1 (Fisher–Yates on mt19937_64).
std::vector<std::uint32_t> seeded_order(std::size_t count, std::uint64_t seed);

struct SeparatedSet {
  std::vector<std::uint32_t> indices;
  int n = 0;
  double delta = 0.0;
  std::size_t size() const { return indices.size(); }
};

SeparatedSet max_separated(const DynamicalSystem& sys, const SampleCloud& cloud, int n, double delta,
                           std::uint64_t order_seed, int workers = 0);

/// Greedy pass over a precomputed table using only its first n iterates.
/// Indices in `prefix` are offered first (they must already be separated at
/// (n, delta)), then the rest of `order`.
SeparatedSet max_separated(const DynamicalSystem& sys, const OrbitTable& table, int n, double delta,
                           const std::vector<std::uint32_t>& order,
                           const std::vector<std::uint32_t>& prefix = {});

/// Greedy cover (index order) estimating the minimal (n, delta)-spanning cardinality.
/// Centers are picked among still-uncovered points, so they are pairwise
/// more than delta apart.
std::size_t min_spanning_greedy(const DynamicalSystem& sys, const SampleCloud& cloud, int n, double delta,
                                int workers = 0);
std::size_t min_spanning_greedy(const DynamicalSystem& sys, const OrbitTable& table, int n, double delta);

struct CountRow {
  int n = 0;
  double delta = 0.0;
  std::size_t count = 0;
  bool saturated = false;
  /// Greedy spanning count at radius 2·delta, when requested; -1 on
  /// saturated rows, where count equals the cloud size and bounds any cover.
  std::int64_t spanning_2delta = -1;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double max_residual = 0.0;
  int lo = 0;  // index range [lo, hi] into the fitted series
  int hi = 0;
  bool affine = false;
};

/// Least-squares line through (x[i], y[i]) for i in [lo, hi].
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, int lo, int hi);

/// Which neighbouring table entry seeds each greedy pass.
enum class Chain { None, AlongN, AlongDelta };

struct EstimatorOptions {
  /// Residual allowance on top of 2·stderr when deciding whether a window
  /// of log-counts is affine; absorbs integer quantization of small counts.
  double affine_floor = 0.05;
  int min_window = 3;
  bool with_spanning = false;
  Chain chain = Chain::AlongDelta;
  int workers = 0;
};

struct WindowFit {
  LineFit fit;
  int n_min = 0;
  int n_max = 0;
  bool curvature = false;  // no window passed the affine test
  bool degenerate = false;
};

/// Chooses the largest contiguous window of unsaturated points whose
/// log-counts are affine, ties broken by the smaller stderr.
WindowFit fit_growth_window(const std::vector<int>& ns, const std::vector<std::size_t>& counts,
                            const std::vector<bool>& saturated, const EstimatorOptions& opt);

struct EntropyEstimate {
  double rate = 0.0;
  double slope_stderr = 0.0;
  std::array<int, 2> fit_window{0, 0};
  std::vector<int> n_schedule;
  std::vector<double> delta_schedule;
  std::uint64_t seed = 0;
  std::size_t cloud_size = 0;
  std::vector<CountRow> counts;
  bool saturated = false;
  bool curvature = false;
  bool delta_monotone = true;
  bool n_monotone = true;
  std::vector<double> rate_per_delta;

  std::size_t count(int n, double delta) const;
  json to_json() const;
  std::string counts_csv() const;
};

/// Fills the (n, delta) table with greedy separated counts and fits the
/// growth rate at the smallest delta. With Chain::AlongDelta (the default)
/// S(n, delta) is seeded with S(n, delta_prev), so counts never decrease as
/// delta shrinks; monotonicity in n is measured and reported.
EntropyEstimate entropy_estimate(const DynamicalSystem& sys, const SampleCloud& cloud,
                                 const std::vector<int>& n_schedule, const std::vector<double>& delta_schedule,
                                 std::uint64_t order_seed, const EstimatorOptions& opt = {});

}  // namespace bowen
