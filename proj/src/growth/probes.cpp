#include <algorithm>
#include <cmath>
#include <sstream>

#include "bowen/format.hpp"
#include "bowen/growth.hpp"

namespace bowen {

json DiskBoxReport::to_json() const {
  return {{"delta", delta},
          {"disk", disk.to_json()},
          {"box", box.to_json()},
          {"difference", difference},
          {"pass", pass}};
}

DiskBoxReport disk_vs_box_comparison(const DynamicalSystem& sys, const Point& x, double delta,
                                     const DiskBoxSchedules& sch, const FoliationConfig& cfg) {
  if (sch.u_samples < 21) throw InputError("disk_vs_box: u_samples must be >= 21");
  DiskBoxReport rep;
  rep.delta = delta;

  const LeafSegment leaf = unstable_segment(sys, x, delta, 2.0 * delta / (sch.u_samples - 1), cfg);
  const SampleCloud disk = make_cloud(sys, leaf.points, "leaf:u=" + std::to_string(leaf.points.size()), "leaf");

  const ProductBox pb =
      build_product_box(sys, x, delta, sch.center_samples, cfg, sch.fibre_samples, sch.u_samples);
  const SampleCloud box = make_cloud(sys, pb.d_samples,
                                     "box:u=" + std::to_string(sch.u_samples) + ",c=" +
                                         std::to_string(sch.center_samples) + ",s=" + std::to_string(sch.fibre_samples),
                                     "box");

  rep.disk = entropy_estimate(sys, disk, sch.n_schedule, sch.delta_schedule, sch.seed, sch.estimator);
  rep.box = entropy_estimate(sys, box, sch.n_schedule, sch.delta_schedule, sch.seed, sch.estimator);
  rep.difference = rep.disk.rate - rep.box.rate;
  rep.pass = std::abs(rep.difference) <= 0.1;
  return rep;
}

std::string ContinuityCurve::to_csv() const {
  std::ostringstream os;
  os << "epsilon,rate,stderr\n";
  for (std::size_t i = 0; i < epsilon.size(); ++i)
    os << format_double(epsilon[i]) << "," << format_double(rate[i]) << "," << format_double(stderr_[i]) << "\n";
  return os.str();
}

json ContinuityCurve::to_json() const {
  json pts = json::array();
  for (const auto& p : base_points) pts.push_back(point_to_json(p));
  return {{"epsilon", epsilon}, {"rate", rate}, {"stderr", stderr_}, {"base_points", pts}, {"modulus", modulus}};
}

ContinuityCurve continuity_probe(const SystemFamily& family, const std::vector<double>& eps_schedule,
                                 const Point& x, double delta, const std::vector<int>& N_schedule,
                                 const GrowthOptions& opt) {
  if (eps_schedule.empty()) throw InputError("continuity probe needs a nonempty epsilon schedule");
  ContinuityCurve cc;
  for (double eps : eps_schedule) {
    const SystemHandle sys = family(eps);
    const Point base = sys->canonical(x);
    const GrowthCurve gc = unstable_rate_estimate(*sys, base, delta, N_schedule, opt);
    cc.epsilon.push_back(eps);
    cc.rate.push_back(gc.rate);
    cc.stderr_.push_back(gc.rate_stderr);
    cc.base_points.push_back(base);
  }
  for (std::size_t i = 1; i < cc.rate.size(); ++i)
    cc.modulus = std::max(cc.modulus, std::abs(cc.rate[i] - cc.rate[i - 1]));
  return cc;
}

}  // namespace bowen
