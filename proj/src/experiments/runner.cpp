#include <chrono>
#include <cmath>
#include <sstream>

#include "bowen/experiments.hpp"
#include "bowen/format.hpp"
#include "bowen/growth.hpp"

namespace bowen {

namespace {

class Stopwatch {
 public:
  explicit Stopwatch(json& sink) : sink_(sink) {}
  template <class F>
  auto stage(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = f();
    sink_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
  }

 private:
  json& sink_;
};

std::vector<int> int_list(const json& j) { return j.get<std::vector<int>>(); }
std::vector<double> double_list(const json& j) { return j.get<std::vector<double>>(); }

// Ten base iterations' worth of steps: on suspensions a step of time t
// crosses the roof at most once per roof_min / t steps.
std::vector<int> auto_schedule(const DynamicalSystem& sys) {
  int top = 10;
  const auto tr = sys.traits();
  if (tr.suspension) {
    const double t = sys.config().contains("t") ? sys.config()["t"].get<double>()
                                                : sys.config()["reference"]["t"].get<double>();
    top = static_cast<int>(std::floor(10.0 * tr.suspension->roof().min_value() / t + 1e-9));
  }
  top = std::max(top, 2);
  std::vector<int> ns;
  for (int n = 1; n <= top; ++n) ns.push_back(n);
  return ns;
}

std::vector<int> growth_schedule(const DynamicalSystem& sys, const json& N) {
  return N.is_string() ? auto_schedule(sys) : int_list(N);
}

FoliationConfig foliation_config(const json& k) {
  FoliationConfig c;
  c.K0 = k["K0"];
  c.K1 = k["K1"];
  c.K2 = k["K2"];
  c.delta0 = k["delta0"];
  c.gamma = k["gamma"];
  c.chart_radius = k["chart_radius"];
  c.gt_tol = k["gt_tol"];
  return c;
}

json run_estimate(const DynamicalSystem& sys, const json& p, std::uint64_t seed, int workers, ExperimentRecord& rec,
                  Stopwatch& sw) {
  const SampleCloud cloud = sw.stage("cloud", [&] {
    return p["cloud"]["kind"] == "grid" ? grid_cloud(sys, p["cloud"]["per_axis"].get<int>())
                                        : random_cloud(sys, p["cloud"]["count"].get<std::size_t>(), seed);
  });
  EstimatorOptions opt;
  opt.affine_floor = p["affine_floor"];
  opt.min_window = p["min_window"];
  opt.with_spanning = p["spanning"];
  const std::string chain = p["chain"];
  opt.chain = chain == "delta" ? Chain::AlongDelta : chain == "n" ? Chain::AlongN : Chain::None;
  opt.workers = workers;
  const EntropyEstimate est =
      sw.stage("estimate", [&] { return entropy_estimate(sys, cloud, int_list(p["n"]), double_list(p["delta"]), seed, opt); });
  rec.tables["counts.csv"] = est.counts_csv();
  rec.seeds["order_seed"] = seed;
  if (p["cloud"]["kind"] == "random") rec.seeds["cloud_seed"] = seed;
  json r = est.to_json();
  r["cloud"] = cloud.provenance;
  return r;
}

json run_growth(const DynamicalSystem& sys, const json& p, int workers, ExperimentRecord& rec, Stopwatch& sw) {
  GrowthOptions opt;
  opt.spacing_factor = p["spacing_factor"];
  opt.workers = workers;
  const Point x = point_from_json(p["x"], sys.dimension());
  const std::vector<int> ns = growth_schedule(sys, p["N"]);
  const GrowthCurve gc = sw.stage("growth", [&] { return unstable_rate_estimate(sys, x, p["delta"], ns, opt); });
  rec.tables["growth.csv"] = gc.to_csv();
  return gc.to_json();
}

json run_continuity(const DynamicalSystem& sys, const json& system_cfg, const json& p, int workers,
                    ExperimentRecord& rec, Stopwatch& sw) {
  const std::string family = p["family"];
  SystemFamily fam;
  if (family == "time_t") {
    if (sys.kind() != SystemKind::TimeT) throw InputError("config.params.family: time_t needs a time_t system");
    fam = [system_cfg](double t) {
      json c = system_cfg;
      c["t"] = t;
      return system_from_config(c);
    };
  } else if (family == "center_shear") {
    if (sys.kind() != SystemKind::TimeT)
      throw InputError("config.params.family: center_shear needs a time_t reference system");
    const PerturbationShape shape = PerturbationShape::from_json(p["shape"]);
    const SystemHandle ref = system_from_config(system_cfg);
    fam = [ref, shape](double eps) { return perturbed_map(ref, eps, shape); };
  } else {
    const SystemHandle fixed = system_from_config(system_cfg);
    fam = [fixed](double) { return fixed; };
  }
  GrowthOptions opt;
  opt.spacing_factor = p["spacing_factor"];
  opt.workers = workers;
  const Point x = point_from_json(p["x"], sys.dimension());
  const double delta = p["delta"];
  const std::vector<double> values = double_list(p["values"]);

  // Each member gets its own schedule when N is automatic (time_t spans different t).
  json curves = json::array();
  ContinuityCurve cc = sw.stage("probe", [&] {
    ContinuityCurve out;
    for (double v : values) {
      const SystemHandle member = fam(v);
      const auto ns = growth_schedule(*member, p["N"]);
      const GrowthCurve gc = unstable_rate_estimate(*member, member->canonical(x), delta, ns, opt);
      curves.push_back(gc.to_json());
      out.epsilon.push_back(v);
      out.rate.push_back(gc.rate);
      out.stderr_.push_back(gc.rate_stderr);
      out.base_points.push_back(member->canonical(x));
    }
    for (std::size_t i = 1; i < out.rate.size(); ++i)
      out.modulus = std::max(out.modulus, std::abs(out.rate[i] - out.rate[i - 1]));
    return out;
  });
  rec.tables["continuity.csv"] = cc.to_csv();
  json r = cc.to_json();
  r["curves"] = curves;
  return r;
}

json run_disk_box(const DynamicalSystem& sys, const json& p, std::uint64_t seed, int workers, ExperimentRecord& rec,
                  Stopwatch& sw) {
  DiskBoxSchedules s;
  s.n_schedule = int_list(p["n"]);
  s.delta_schedule = double_list(p["separation"]);
  s.u_samples = p["u_samples"];
  s.center_samples = p["center_samples"];
  s.fibre_samples = p["fibre_samples"];
  s.seed = seed;
  s.estimator.workers = workers;
  const Point x = point_from_json(p["x"], sys.dimension());
  json reports = json::array();
  bool pass = true;
  std::vector<double> diffs;
  for (double d : double_list(p["delta"])) {
    const DiskBoxReport r =
        sw.stage("delta=" + format_double(d), [&] { return disk_vs_box_comparison(sys, x, d, s); });
    reports.push_back(r.to_json());
    rec.tables["disk_counts_" + format_double(d) + ".csv"] = r.disk.counts_csv();
    rec.tables["box_counts_" + format_double(d) + ".csv"] = r.box.counts_csv();
    pass = pass && r.pass;
    diffs.push_back(std::abs(r.difference));
  }
  rec.seeds["order_seed"] = seed;
  bool stable = true;
  for (std::size_t i = 1; i < diffs.size(); ++i) stable = stable && diffs[i] <= diffs[i - 1] + 0.05;
  return {{"reports", reports}, {"pass", pass}, {"refinement_stable", stable}};
}

json run_foliation(const DynamicalSystem& sys, const json& p, std::uint64_t seed, ExperimentRecord& rec,
                   Stopwatch& sw) {
  const FoliationConfig cfg = foliation_config(p["constants"]);
  const Point x = sys.canonical(point_from_json(p["x"], sys.dimension()));
  json r = json::object();
  for (const auto& check : p["checks"]) {
    const std::string name = check;
    if (name == "segment") {
      r[name] = sw.stage(name, [&] {
        const double radius = p["segment"]["radius"], spacing = p["segment"]["spacing"];
        const LeafSegment u = unstable_segment(sys, x, radius, spacing, cfg);
        const LeafSegment s = stable_segment(sys, x, radius, spacing, cfg);
        FoliationConfig tight = cfg;
        tight.gt_tol = std::min(cfg.gt_tol, 1e-9);
        const LeafSegment image = unstable_segment(sys, sys.eval(x), 3.0 * radius, spacing / 8.0, tight);
        double inv = 0.0;
        for (const auto& v : u.points) inv = std::max(inv, distance_to_segment(sys, image, sys.eval(v)));
        rec.tables["unstable_segment.csv"] = u.to_csv();
        rec.tables["stable_segment.csv"] = s.to_csv();
        return json{{"unstable_vertices", u.points.size()},
                    {"unstable_length", u.length()},
                    {"stable_vertices", s.points.size()},
                    {"stable_length", s.length()},
                    {"gaps", u.gaps},
                    {"invariance", inv},
                    {"pass", inv <= 1e-7}};
      });
    } else if (name == "holonomy") {
      r[name] = sw.stage(name, [&] {
        const auto& h = p["holonomy"];
        const double c = h["c"];
        const int depth = h["depth"];
        const double radius = h["radius"];
        if (!sys.traits().suspension) throw InputError("holonomy check needs a system with a center direction");
        const Point y = sys.traits().suspension->flow(x, c);
        const LeafSegment u = unstable_segment(sys, x, radius, radius / 10.0, cfg);
        const HolonomyResult a = center_holonomy(sys, x, y, u.points, depth, cfg);
        const HolonomyResult b = center_holonomy(sys, x, y, u.points, depth + 1, cfg);
        double consistency = 0.0;
        for (std::size_t i = 0; i < a.images.size(); ++i)
          consistency = std::max(consistency, sys.distance(a.images[i], b.images[i]));
        std::vector<Point> pushed;
        for (const auto& z : u.points) pushed.push_back(sys.eval(z));
        const HolonomyResult e = center_holonomy(sys, sys.eval(x), sys.eval(y), pushed, depth + 1, cfg);
        double equivariance = 0.0;
        for (std::size_t i = 0; i < a.images.size(); ++i)
          equivariance = std::max(equivariance, sys.distance(sys.eval(a.images[i]), e.images[i]));
        const auto bounds = holonomy_bounds(sys, x, y, double_list(h["radii"]), depth, cfg);
        json bj = json::array();
        bool monotone = true;
        for (std::size_t i = 0; i < bounds.size(); ++i) {
          bj.push_back({{"radius", bounds[i].radius}, {"c1", bounds[i].c1}, {"c2", bounds[i].c2}});
          monotone = monotone && bounds[i].c1 <= bounds[i].c2;
          if (i) monotone = monotone && (bounds[i].radius < bounds[i - 1].radius ? bounds[i].c2 <= bounds[i - 1].c2
                                                                                  : bounds[i].c2 >= bounds[i - 1].c2);
        }
        return json{{"depth_consistency", consistency},
                    {"equivariance", equivariance},
                    {"pullback_radius", a.pullback_radius},
                    {"bounds", bj},
                    {"bounds_monotone", monotone},
                    {"pass", consistency <= 1e-7 && equivariance <= 1e-6 && monotone}};
      });
    } else if (name == "nonexpansion") {
      r[name] = sw.stage(name, [&] {
        const auto rep = center_nonexpansion_check(sys, p["nonexpansion"]["samples"], p["nonexpansion"]["horizon"],
                                                   seed, cfg);
        json j = rep.to_json();
        const Roof& roof = sys.traits().suspension->roof();
        const double roof_bound = roof.max_value() / roof.min_value() + 0.01;
        j["roof_bound"] = roof_bound;
        j["within_roof_bound"] = std::max(rep.max_ratio_forward, rep.max_ratio_backward) <= roof_bound;
        return j;
      });
      rec.seeds["nonexpansion_seed"] = seed;
    } else if (name == "density") {
      r[name] = sw.stage(name, [&] {
        const auto& d = p["density"];
        const SampleCloud probes = grid_cloud(sys, d["probes_per_axis"]);
        json rows = json::array();
        double prev = std::numeric_limits<double>::infinity();
        bool monotone = true, last_pass = false;
        for (double L : double_list(d["L"])) {
          const DensityReport rep = density_check(sys, x, d["K0"], L, probes, cfg);
          json row = rep.to_json();
          row["L"] = L;
          rows.push_back(row);
          monotone = monotone && rep.covering_radius <= prev;
          prev = rep.covering_radius;
          last_pass = rep.pass;
        }
        return json{{"rows", rows}, {"monotone", monotone}, {"pass", monotone && last_pass}};
      });
    } else if (name == "product_box") {
      r[name] = sw.stage(name, [&] {
        const auto& b = p["product_box"];
        const ProductBox box = build_product_box(sys, x, b["delta"], b["samples_per_axis"], cfg);
        return json{{"a_samples", box.a_samples.size()},
                    {"d_samples", box.d_samples.size()},
                    {"reconstruction_error", box.reconstruction_error},
                    {"pass", box.reconstruction_error <= 1e-6}};
      });
    }
  }
  return r;
}

}  // namespace

ExperimentRecord run_experiment(const json& config, const RunOptions& opt) {
  json c = canonical_config(config);
  if (c["experiment"] == "sweep") throw InputError("config.experiment: use the sweep verb for sweep configs");
  if (opt.seed) {
    c["seed"] = *opt.seed;
    c = canonical_config(c);
  }
  ExperimentRecord rec;
  rec.id = config_id(c);
  rec.config = c;
  rec.version = library_version();
  rec.seeds = json::object();
  rec.timings = json::object();
  Stopwatch sw(rec.timings);

  const SystemHandle sys = sw.stage("system", [&] { return system_from_config(c["system"]); });
  const std::uint64_t seed = c["seed"];
  const json& p = c["params"];
  const std::string kind = c["experiment"];
  const int workers = opt.workers;
  if (kind == "estimate") rec.results = run_estimate(*sys, p, seed, workers, rec, sw);
  if (kind == "growth") rec.results = run_growth(*sys, p, workers, rec, sw);
  if (kind == "continuity") rec.results = run_continuity(*sys, c["system"], p, workers, rec, sw);
  if (kind == "disk-vs-box") rec.results = run_disk_box(*sys, p, seed, workers, rec, sw);
  if (kind == "foliation-check") rec.results = run_foliation(*sys, p, seed, rec, sw);
  return rec;
}

namespace {

json apply_axis(json cfg, const std::string& axis, const json& value) {
  json& sys = cfg["system"];
  json& p = cfg["params"];
  const std::string kind = cfg["experiment"];
  if (axis == "t") {
    if (sys["kind"] == "time_t") {
      sys["t"] = value;
    } else if (sys["kind"] == "perturbed") {
      sys["reference"]["t"] = value;
    } else {
      throw InputError("grid axis t needs a time_t or perturbed system");
    }
  } else if (axis == "epsilon") {
    if (sys["kind"] != "perturbed") throw InputError("grid axis epsilon needs a perturbed system");
    sys["epsilon"] = value;
  } else if (axis == "delta") {
    if (kind == "estimate" || kind == "disk-vs-box") {
      p["delta"] = json::array({value});
    } else if (kind == "growth" || kind == "continuity") {
      p["delta"] = value;
    } else {
      throw InputError("grid axis delta does not apply to " + kind);
    }
  } else if (axis == "n") {
    json ns = json::array();
    for (int i = 1; i <= value.get<int>(); ++i) ns.push_back(i);
    if (kind == "estimate" || kind == "disk-vs-box") {
      p["n"] = ns;
    } else if (kind == "growth" || kind == "continuity") {
      p["N"] = ns;
    } else {
      throw InputError("grid axis n does not apply to " + kind);
    }
  }
  return cfg;
}

std::pair<std::string, std::string> rate_of(const json& results) {
  auto pick = [&](const char* k) { return results.contains(k) ? format_double(results[k].get<double>()) : ""; };
  std::string err = pick("stderr");
  if (err.empty()) err = pick("rate_stderr");
  return {pick("rate"), err};
}

}  // namespace

SweepResult run_sweep(const json& config, const RunOptions& opt) {
  SweepResult res;
  res.config = canonical_config(config);
  if (res.config["experiment"] != "sweep") throw InputError("config.experiment: expected sweep");
  json base = res.config["base"];
  if (opt.seed) base["seed"] = *opt.seed;

  std::vector<std::string> axes;
  std::vector<std::vector<json>> values;
  for (const auto& [axis, vals] : res.config["grid"].items()) {
    axes.push_back(axis);
    values.emplace_back(vals.begin(), vals.end());
  }

  std::ostringstream csv;
  for (const auto& a : axes) csv << a << ",";
  csv << "rate,stderr,error\n";

  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    SweepPoint pt;
    pt.parameters = json::object();
    json cfg = base;
    try {
      for (std::size_t a = 0; a < axes.size(); ++a) {
        pt.parameters[axes[a]] = values[a][idx[a]];
        cfg = apply_axis(cfg, axes[a], values[a][idx[a]]);
      }
      pt.record = run_experiment(cfg, {opt.workers, std::nullopt});
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    for (const auto& a : axes) {
      const json& v = pt.parameters.contains(a) ? pt.parameters[a] : json();
      csv << (v.is_number_integer() ? std::to_string(v.get<std::int64_t>())
              : v.is_number()       ? format_double(v.get<double>())
                                    : std::string())
          << ",";
    }
    if (pt.record) {
      const auto [rate, err] = rate_of(pt.record->results);
      csv << rate << "," << err << ",\n";
    } else {
      std::string msg = pt.error;
      for (auto& ch : msg)
        if (ch == '"') ch = '\'';
      csv << ",,\"" << msg << "\"\n";
    }
    res.points.push_back(std::move(pt));

    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < values[a].size()) break;
      idx[a] = 0;
      if (a == 0) {
        res.aggregate_csv = csv.str();
        return res;
      }
    }
    if (axes.empty()) break;
  }
  res.aggregate_csv = csv.str();
  return res;
}

}  // namespace bowen
