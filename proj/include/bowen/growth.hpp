#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bowen/entropy.hpp"
#include "bowen/foliation.hpp"

namespace bowen {

/// Image of an unstable segment after `steps` applications of eval. Whenever
/// two consecutive images are more than `spacing` apart, the midpoint of their
/// preimages is inserted and mapped, recursively.
LeafSegment grow_segment(const DynamicalSystem& sys, const LeafSegment& seg, int steps, double spacing,
                         std::size_t vertex_budget = 10'000'000, int workers = 0);

struct DiskPacking {
  std::size_t count = 0;
  std::vector<double> arc;     // arclength coordinate of each center
  std::vector<Point> centers;
};

/// Greedy left-to-right packing of radius-two_delta disks along the polyline:
/// centers at two_delta/2 + k·2·two_delta.
DiskPacking count_disjoint_disks(const DynamicalSystem& sys, const LeafSegment& seg, double two_delta);
/// Count only, from the arclength alone.
std::size_t disjoint_disk_count(double arclength, double two_delta);

struct GrowthCurve {
  Point x;
  double delta = 0.0;
  std::vector<int> N;
  std::vector<std::size_t> counts;
  std::vector<double> arclength;
  std::vector<std::vector<double>> center_arc;
  std::vector<std::vector<Point>> centers;
  double rate = 0.0;
  double rate_stderr = 0.0;

  std::string to_csv() const;
  json to_json() const;
};

struct GrowthOptions {
  double spacing_factor = 0.1;  // polyline spacing as a fraction of delta
  std::size_t vertex_budget = 10'000'000;
  bool keep_centers = true;
  int workers = 0;
};

/// Grows W^u_delta(x) through the schedule, packs 2·delta disks at each N and
/// fits log(count) against N.
GrowthCurve unstable_rate_estimate(const DynamicalSystem& sys, const Point& x, double delta,
                                   const std::vector<int>& N_schedule, const GrowthOptions& opt = {});
/// Same, starting from an explicit initial segment.
GrowthCurve growth_curve(const DynamicalSystem& sys, const LeafSegment& seg, double delta,
                         const std::vector<int>& N_schedule, const GrowthOptions& opt = {});

struct DiskBoxSchedules {
  std::vector<int> n_schedule{1, 2, 3, 4, 5, 6};
  std::vector<double> delta_schedule{0.02, 0.01, 0.005};
  int u_samples = 2049;
  int center_samples = 5;
  int fibre_samples = 3;
  std::uint64_t seed = 1;
  EstimatorOptions estimator{};
};

struct DiskBoxReport {
  double delta = 0.0;
  EntropyEstimate disk;  // cloud on W^u_delta(x)
  EntropyEstimate box;   // cloud on D(x, delta)
  double difference = 0.0;
  bool pass = false;
  json to_json() const;
};

DiskBoxReport disk_vs_box_comparison(const DynamicalSystem& sys, const Point& x, double delta,
                                     const DiskBoxSchedules& schedules, const FoliationConfig& cfg = {});

using SystemFamily = std::function<SystemHandle(double)>;

struct ContinuityCurve {
  std::vector<double> epsilon;
  std::vector<double> rate;
  std::vector<double> stderr_;
  std::vector<Point> base_points;
  double modulus = 0.0;  // max |rate(ε_{i+1}) − rate(ε_i)|

  std::string to_csv() const;
  json to_json() const;
};

/// unstable_rate_estimate at each ε from the same base point. The model
/// families share one state space, so the nearest point to x in every member
/// is x itself.
ContinuityCurve continuity_probe(const SystemFamily& family, const std::vector<double>& eps_schedule,
                                 const Point& x, double delta, const std::vector<int>& N_schedule,
                                 const GrowthOptions& opt = {});

}  // namespace bowen
