#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bowen/entropy.hpp"
#include "bowen/systems.hpp"

namespace bowen {

struct FoliationConfig {
  double K0 = 2.0;     // cap on center-segment length
  double K1 = 0.5;     // lower bound for |I_f(x)|; cap on center distance in checks
  double K2 = 2.0;     // upper bound for |I_f(x)|
  double delta0 = 0.05;
  double gamma = 0.1;  // density threshold
  double chart_radius = 0.1;
  double gt_tol = 1e-7;
  double holonomy_tol = 1e-10;  // leaf accuracy used inside the local holonomy step
  int gt_max_iter = 60;
};

enum class LeafKind { Unstable, Stable, Center };
std::string to_string(LeafKind kind);

struct LeafSegment {
  LeafKind kind = LeafKind::Unstable;
  std::vector<Point> points;
  std::vector<double> arc;  // cumulative polyline arclength, arc[0] = 0
  double spacing_bound = 0.0;
  std::size_t anchor = 0;   // index of the base point
  std::vector<double> gaps; // graph-transform gaps, empty for closed forms

  double length() const { return arc.empty() ? 0.0 : arc.back(); }
  std::string to_csv() const;
};

LeafSegment unstable_segment(const DynamicalSystem& sys, const Point& x, double radius, double spacing,
                             const FoliationConfig& cfg = {});
LeafSegment stable_segment(const DynamicalSystem& sys, const Point& x, double radius, double spacing,
                           const FoliationConfig& cfg = {});
/// Forward arc of the flow line through x with the given arclength.
LeafSegment center_segment(const DynamicalSystem& sys, const Point& x, double length, double spacing,
                           const FoliationConfig& cfg = {});
/// I_f(x): the center arc from x to f(x).
LeafSegment center_interval(const DynamicalSystem& sys, const Point& x, double spacing);

/// Distance from p to the polyline (segment by segment, in local charts).
double distance_to_segment(const DynamicalSystem& sys, const LeafSegment& seg, const Point& p);

/// Signed flow time c with flow(x, c) = y for center-preserving systems.
double center_offset(const DynamicalSystem& sys, const Point& x, const Point& y, double tol = 1e-8);

struct HolonomyResult {
  std::vector<Point> images;
  std::vector<double> center_offsets;  // flow time from each input point to its image
  int depth = 0;
  double pullback_radius = 0.0;        // max distance of pulled-back points from f^{-n}x
};

/// h^c = f^n ∘ (local holonomy) ∘ f^{-n} from W^u(x) to W^u(y), y on the
/// flow line of x. The local step moves along the flow to the unstable leaf
/// of f^{-n}y in that point's chart.
HolonomyResult center_holonomy(const DynamicalSystem& sys, const Point& x, const Point& y,
                               const std::vector<Point>& u_points, int depth, const FoliationConfig& cfg = {});

struct HolonomyBounds {
  double radius = 0.0;
  double c1 = 0.0;  // image contains W^u_{c1}(y)
  double c2 = 0.0;  // image contained in W^u_{c2}(y)
};

/// Leaf-arclength extent of h^c(W^u_r(x)) around y, for each radius r.
std::vector<HolonomyBounds> holonomy_bounds(const DynamicalSystem& sys, const Point& x, const Point& y,
                                            const std::vector<double>& radii, int depth,
                                            const FoliationConfig& cfg = {});

struct NonexpansionReport {
  double max_ratio_forward = 1.0;
  double max_ratio_backward = 1.0;
  int samples = 0;
  int horizon = 0;
  double bound = 0.0;
  bool pass = false;
  json to_json() const;
};

NonexpansionReport center_nonexpansion_check(const DynamicalSystem& sys, int samples, int horizon,
                                             std::uint64_t seed, const FoliationConfig& cfg = {});

struct ProductBox {
  Point center;
  double delta = 0.0;
  int samples_per_axis = 0;
  std::vector<Point> a_samples;   // row-major over (u, c)
  std::vector<Point> d_samples;   // each a_sample followed by its stable fibre
  std::vector<Point> x_u;         // generating unstable points
  std::vector<Point> x_c;         // generating center points
  double reconstruction_error = 0.0;
};

/// `fibre_samples` points per stable fibre in D(x, delta); 0 means samples_per_axis.
ProductBox build_product_box(const DynamicalSystem& sys, const Point& x, double delta, int samples_per_axis,
                             const FoliationConfig& cfg = {}, int fibre_samples = 0, int u_samples = 0);

struct DensityReport {
  double covering_radius = 0.0;
  std::size_t sample_count = 0;
  bool pass = false;
  json to_json() const;
};

DensityReport density_check(const DynamicalSystem& sys, const Point& x, double K0, double L,
                            const SampleCloud& probes, const FoliationConfig& cfg = {});

}  // namespace bowen
