#include <algorithm>
#include <cmath>
#include <sstream>

#include "../foliation/leaf_detail.hpp"
#include "bowen/format.hpp"
#include "bowen/growth.hpp"
#include "bowen/parallel.hpp"

namespace bowen {

namespace {

constexpr int kMaxBisections = 50;

class Grower {
 public:
  Grower(const DynamicalSystem& sys, double spacing, std::size_t budget, int step)
      : sys_(sys), spacing_(spacing), budget_(budget), step_(step) {}

  void refine(const Point& a, const Point& b, const Point& fa, const Point& fb, int depth,
              std::vector<Point>& out) {
    if (depth >= kMaxBisections || sys_.distance(fa, fb) <= spacing_) return;
    const Point m = sys_.chart_point(a, detail::scaled(sys_.chart_offset(a, b), 0.5));
    const Point fm = sys_.eval(m);
    refine(a, m, fa, fm, depth + 1, out);
    out.push_back(fm);
    if (out.size() > budget_)
      throw BudgetError("grow_segment: vertex budget of " + std::to_string(budget_) + " exceeded at step " +
                            std::to_string(step_),
                        step_);
    refine(m, b, fm, fb, depth + 1, out);
  }

 private:
  const DynamicalSystem& sys_;
  double spacing_;
  std::size_t budget_;
  int step_;
};

}  // namespace

LeafSegment grow_segment(const DynamicalSystem& sys, const LeafSegment& seg, int steps, double spacing,
                         std::size_t vertex_budget, int workers) {
  if (seg.kind != LeafKind::Unstable) throw InputError("grow_segment needs an unstable segment");
  if (steps < 0) throw InputError("grow_segment: steps must be >= 0");
  if (!(spacing > 0.0)) throw InputError("grow_segment: spacing must be > 0");
  if (seg.points.empty()) throw InputError("grow_segment: empty segment");
  if (steps == 0) return seg;

  std::vector<Point> cur = seg.points;
  std::size_t anchor = seg.anchor;
  for (int s = 1; s <= steps; ++s) {
    std::vector<Point> img(cur.size());
    parallel_for(cur.size(), workers, [&](std::size_t i) { img[i] = sys.eval(cur[i]); });
    Grower grower(sys, spacing, vertex_budget, s);
    std::vector<Point> out;
    out.reserve(img.size() * 3);
    std::size_t new_anchor = 0;
    for (std::size_t i = 0; i < img.size(); ++i) {
      if (i == anchor) new_anchor = out.size();
      out.push_back(img[i]);
      if (i + 1 < img.size()) grower.refine(cur[i], cur[i + 1], img[i], img[i + 1], 0, out);
    }
    if (out.size() > vertex_budget)
      throw BudgetError("grow_segment: vertex budget of " + std::to_string(vertex_budget) + " exceeded at step " +
                            std::to_string(s),
                        s);
    cur.swap(out);
    anchor = new_anchor;
  }

  LeafSegment res;
  res.kind = LeafKind::Unstable;
  res.points = std::move(cur);
  res.anchor = anchor;
  detail::finish(sys, res);
  return res;
}

std::size_t disjoint_disk_count(double arclength, double two_delta) {
  if (!(two_delta > 0.0)) throw InputError("two_delta must be > 0");
  // Relative slack so that an arclength equal to a packing boundary up to
  // rounding still counts the last disk.
  const double slack = 1e-12 * std::max(1.0, arclength / two_delta);
  const double q = (arclength - two_delta) / (2.0 * two_delta);
  if (q < -slack) return 0;
  return 1 + static_cast<std::size_t>(std::floor(std::max(0.0, q) + slack));
}

DiskPacking count_disjoint_disks(const DynamicalSystem& sys, const LeafSegment& seg, double two_delta) {
  DiskPacking pk;
  pk.count = disjoint_disk_count(seg.length(), two_delta);
  std::size_t k = 0;
  for (std::size_t c = 0; c < pk.count; ++c) {
    const double a = std::min(two_delta / 2.0 + 2.0 * two_delta * static_cast<double>(c), seg.length());
    while (k + 2 < seg.arc.size() && seg.arc[k + 1] < a) ++k;
    Point p = seg.points[k];
    if (k + 1 < seg.points.size()) {
      const double len = seg.arc[k + 1] - seg.arc[k];
      const double t = len > 0.0 ? std::clamp((a - seg.arc[k]) / len, 0.0, 1.0) : 0.0;
      p = sys.chart_point(seg.points[k], detail::scaled(sys.chart_offset(seg.points[k], seg.points[k + 1]), t));
    }
    pk.arc.push_back(a);
    pk.centers.push_back(p);
  }
  return pk;
}

std::string GrowthCurve::to_csv() const {
  std::ostringstream os;
  os << "N,count,log_count,arclength\n";
  for (std::size_t i = 0; i < N.size(); ++i) {
    os << N[i] << "," << counts[i] << ","
       << (counts[i] > 0 ? format_double(std::log(static_cast<double>(counts[i]))) : std::string("-inf")) << ","
       << format_double(arclength[i]) << "\n";
  }
  return os.str();
}

json GrowthCurve::to_json() const {
  json j;
  j["x"] = point_to_json(x);
  j["delta"] = delta;
  j["N"] = N;
  j["counts"] = counts;
  j["arclength"] = arclength;
  j["rate"] = rate;
  j["rate_stderr"] = rate_stderr;
  j["center_arc"] = center_arc;
  return j;
}

GrowthCurve growth_curve(const DynamicalSystem& sys, const LeafSegment& seg, double delta,
                         const std::vector<int>& N_schedule, const GrowthOptions& opt) {
  if (!(delta > 0.0)) throw InputError("delta must be > 0");
  if (N_schedule.empty()) throw InputError("N schedule must be nonempty");
  for (std::size_t i = 0; i < N_schedule.size(); ++i) {
    if (N_schedule[i] < 0) throw InputError("N schedule entries must be >= 0");
    if (i && N_schedule[i] <= N_schedule[i - 1]) throw InputError("N schedule must be strictly increasing");
  }
  GrowthCurve gc;
  gc.x = seg.points[seg.anchor];
  gc.delta = delta;
  const double spacing = opt.spacing_factor * delta;
  LeafSegment cur = seg;
  int at = 0;
  for (int N : N_schedule) {
    cur = grow_segment(sys, cur, N - at, spacing, opt.vertex_budget, opt.workers);
    at = N;
    DiskPacking pk = count_disjoint_disks(sys, cur, 2.0 * delta);
    gc.N.push_back(N);
    gc.counts.push_back(pk.count);
    gc.arclength.push_back(cur.length());
    gc.center_arc.push_back(std::move(pk.arc));
    if (opt.keep_centers) gc.centers.push_back(std::move(pk.centers));
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < gc.N.size(); ++i) {
    if (gc.counts[i] == 0) continue;
    xs.push_back(gc.N[i]);
    ys.push_back(std::log(static_cast<double>(gc.counts[i])));
  }
  if (xs.size() >= 2) {
    const LineFit f = fit_line(xs, ys, 0, static_cast<int>(xs.size()) - 1);
    gc.rate = f.slope;
    gc.rate_stderr = f.slope_stderr;
  }
  return gc;
}

GrowthCurve unstable_rate_estimate(const DynamicalSystem& sys, const Point& x, double delta,
                                   const std::vector<int>& N_schedule, const GrowthOptions& opt) {
  if (!(delta > 0.0)) throw InputError("delta must be > 0");
  const LeafSegment seg = unstable_segment(sys, x, delta, std::min(opt.spacing_factor, 0.1) * delta);
  return growth_curve(sys, seg, delta, N_schedule, opt);
}

}  // namespace bowen
