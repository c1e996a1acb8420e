#include <algorithm>
#include <cmath>
#include <sstream>

#include "bowen/entropy.hpp"
#include "bowen/format.hpp"

namespace bowen {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, int lo, int hi) {
  if (lo < 0 || hi >= static_cast<int>(x.size()) || hi - lo < 1 || x.size() != y.size())
    throw InputError("fit_line: need at least two points");
  const int k = hi - lo + 1;
  double mx = 0.0, my = 0.0;
  for (int i = lo; i <= hi; ++i) {
    mx += x[static_cast<std::size_t>(i)];
    my += y[static_cast<std::size_t>(i)];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (int i = lo; i <= hi; ++i) {
    const double dx = x[static_cast<std::size_t>(i)] - mx;
    sxx += dx * dx;
    sxy += dx * (y[static_cast<std::size_t>(i)] - my);
  }
  LineFit f;
  f.lo = lo;
  f.hi = hi;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (int i = lo; i <= hi; ++i) {
    const double r = y[static_cast<std::size_t>(i)] - (f.intercept + f.slope * x[static_cast<std::size_t>(i)]);
    ssr += r * r;
    f.max_residual = std::max(f.max_residual, std::abs(r));
  }
  f.slope_stderr = (k > 2 && sxx > 0.0) ? std::sqrt(ssr / (k - 2) / sxx) : 0.0;
  return f;
}

WindowFit fit_growth_window(const std::vector<int>& ns, const std::vector<std::size_t>& counts,
                            const std::vector<bool>& saturated, const EstimatorOptions& opt) {
  const int m = static_cast<int>(ns.size());
  if (m != static_cast<int>(counts.size()) || m != static_cast<int>(saturated.size()))
    throw InputError("fit_growth_window: schedule and count lengths differ");
  WindowFit out;
  std::vector<double> x(ns.begin(), ns.end()), y(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    y[static_cast<std::size_t>(i)] = counts[static_cast<std::size_t>(i)] > 0
                                         ? std::log(static_cast<double>(counts[static_cast<std::size_t>(i)]))
                                         : 0.0;

  bool all_equal = true;
  for (int i = 1; i < m; ++i) all_equal = all_equal && counts[static_cast<std::size_t>(i)] == counts[0];

  // maximal runs of usable points
  std::vector<std::pair<int, int>> runs;
  for (int i = 0; i < m;) {
    if (saturated[static_cast<std::size_t>(i)] || counts[static_cast<std::size_t>(i)] == 0) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < m && !saturated[static_cast<std::size_t>(j + 1)] && counts[static_cast<std::size_t>(j + 1)] > 0) ++j;
    runs.emplace_back(i, j);
    i = j + 1;
  }

  if (all_equal || runs.empty()) {
    out.degenerate = true;
    if (!runs.empty()) {
      out.fit.lo = runs.front().first;
      out.fit.hi = runs.front().second;
    }
    // an empty window (0, 0) when every entry is saturated
    out.n_min = runs.empty() ? 0 : ns[static_cast<std::size_t>(out.fit.lo)];
    out.n_max = runs.empty() ? 0 : ns[static_cast<std::size_t>(out.fit.hi)];
    out.fit.affine = true;
    return out;
  }

  int longest = 0;
  for (auto [a, b] : runs) longest = std::max(longest, b - a + 1);
  const int min_len = std::min(std::max(opt.min_window, 2), longest);
  if (longest < 2) {
    // a single usable point: no slope to speak of
    out.degenerate = true;
    out.fit.lo = out.fit.hi = runs.front().first;
    out.n_min = out.n_max = ns[static_cast<std::size_t>(out.fit.lo)];
    return out;
  }

  bool found = false;
  LineFit best, fallback;
  bool have_fallback = false;
  for (auto [a, b] : runs) {
    for (int lo = a; lo <= b; ++lo) {
      for (int hi = lo + min_len - 1; hi <= b; ++hi) {
        const LineFit f = fit_line(x, y, lo, hi);
        const bool affine = f.max_residual <= 2.0 * f.slope_stderr + opt.affine_floor;
        const int len = hi - lo + 1;
        if (affine) {
          const int blen = best.hi - best.lo + 1;
          if (!found || len > blen || (len == blen && f.slope_stderr < best.slope_stderr)) {
            best = f;
            best.affine = true;
            found = true;
          }
        } else if (len == min_len && (!have_fallback || f.max_residual < fallback.max_residual)) {
          fallback = f;
          have_fallback = true;
        }
      }
    }
  }
  out.fit = found ? best : fallback;
  out.curvature = !found;
  out.n_min = ns[static_cast<std::size_t>(out.fit.lo)];
  out.n_max = ns[static_cast<std::size_t>(out.fit.hi)];
  return out;
}

std::size_t EntropyEstimate::count(int n, double delta) const {
  for (const auto& r : counts)
    if (r.n == n && r.delta == delta) return r.count;
  throw InputError("no count recorded for (n = " + std::to_string(n) + ", delta = " + format_double(delta) + ")");
}

json EntropyEstimate::to_json() const {
  json rows = json::array();
  for (const auto& r : counts) {
    json row = {{"n", r.n}, {"delta", r.delta}, {"count", r.count}, {"saturated", r.saturated}};
    if (r.spanning_2delta >= 0) row["spanning_2delta"] = r.spanning_2delta;
    rows.push_back(row);
  }
  return {{"rate", rate},
          {"stderr", slope_stderr},
          {"window", {fit_window[0], fit_window[1]}},
          {"schedule", {{"n", n_schedule}, {"delta", delta_schedule}}},
          {"seed", seed},
          {"cloud_size", cloud_size},
          {"counts", rows},
          {"saturated", saturated},
          {"curvature", curvature},
          {"delta_monotone", delta_monotone},
          {"n_monotone", n_monotone},
          {"rate_per_delta", rate_per_delta}};
}

std::string EntropyEstimate::counts_csv() const {
  std::ostringstream os;
  const bool span = std::any_of(counts.begin(), counts.end(), [](const CountRow& r) { return r.spanning_2delta >= 0; });
  os << "n,delta,count,saturated" << (span ? ",spanning_2delta" : "") << "\n";
  for (const auto& r : counts) {
    os << r.n << "," << format_double(r.delta) << "," << r.count << "," << (r.saturated ? 1 : 0);
    if (span) os << "," << r.spanning_2delta;
    os << "\n";
  }
  return os.str();
}

EntropyEstimate entropy_estimate(const DynamicalSystem& sys, const SampleCloud& cloud,
                                 const std::vector<int>& n_schedule, const std::vector<double>& delta_schedule,
                                 std::uint64_t order_seed, const EstimatorOptions& opt) {
  if (cloud.size() == 0) throw InputError("entropy_estimate: empty cloud");
  if (n_schedule.size() < 2) throw InputError("entropy_estimate: n schedule needs at least two entries");
  if (delta_schedule.empty()) throw InputError("entropy_estimate: empty delta schedule");
  for (std::size_t i = 0; i < n_schedule.size(); ++i) {
    if (n_schedule[i] < 1) throw InputError("entropy_estimate: n must be >= 1");
    if (i && n_schedule[i] <= n_schedule[i - 1]) throw InputError("entropy_estimate: n schedule must increase");
  }
  for (std::size_t i = 0; i < delta_schedule.size(); ++i) {
    if (!(delta_schedule[i] > 0.0)) throw InputError("entropy_estimate: delta must be > 0");
    if (i && delta_schedule[i] >= delta_schedule[i - 1])
      throw InputError("entropy_estimate: delta schedule must decrease");
  }

  EntropyEstimate est;
  est.n_schedule = n_schedule;
  est.delta_schedule = delta_schedule;
  est.seed = order_seed;
  est.cloud_size = cloud.size();

  const OrbitTable table = orbit_table(sys, cloud, n_schedule.back(), opt.workers);
  const auto order = seeded_order(cloud.size(), order_seed);

  std::vector<std::vector<std::size_t>> grid(delta_schedule.size());
  std::vector<std::vector<std::uint32_t>> above(n_schedule.size());  // sets at the previous delta
  for (std::size_t di = 0; di < delta_schedule.size(); ++di) {
    const double delta = delta_schedule[di];
    std::vector<std::uint32_t> prev;
    for (std::size_t k = 0; k < n_schedule.size(); ++k) {
      const int n = n_schedule[k];
      const auto& prefix = opt.chain == Chain::AlongN ? prev : opt.chain == Chain::AlongDelta ? above[k] : prev;
      SeparatedSet s = max_separated(sys, table, n, delta, order, prefix);
      CountRow row;
      row.n = n;
      row.delta = delta;
      row.count = s.size();
      row.saturated = s.size() == cloud.size();
      // A saturated row bounds every cover trivially, so its spanning count is skipped.
      if (opt.with_spanning && !row.saturated)
        row.spanning_2delta = static_cast<std::int64_t>(min_spanning_greedy(sys, table, n, 2.0 * delta));
      est.counts.push_back(row);
      est.saturated = est.saturated || row.saturated;
      grid[di].push_back(row.count);
      if (opt.chain == Chain::AlongN) prev = std::move(s.indices);
      else if (opt.chain == Chain::AlongDelta) above[k] = std::move(s.indices);
    }
  }
  for (std::size_t di = 0; di < grid.size(); ++di)
    for (std::size_t k = 1; k < n_schedule.size(); ++k)
      if (grid[di][k] < grid[di][k - 1]) est.n_monotone = false;
  for (std::size_t di = 1; di < grid.size(); ++di)
    for (std::size_t k = 0; k < n_schedule.size(); ++k)
      if (grid[di][k] < grid[di - 1][k]) est.delta_monotone = false;

  for (std::size_t di = 0; di < delta_schedule.size(); ++di) {
    std::vector<bool> sat;
    for (auto c : grid[di]) sat.push_back(c == cloud.size());
    const WindowFit w = fit_growth_window(n_schedule, grid[di], sat, opt);
    const double rate = w.degenerate ? 0.0 : std::max(0.0, w.fit.slope);
    est.rate_per_delta.push_back(rate);
    if (di + 1 == delta_schedule.size()) {
      est.rate = rate;
      est.slope_stderr = w.degenerate ? 0.0 : w.fit.slope_stderr;
      est.fit_window = {w.n_min, w.n_max};
      est.curvature = w.curvature;
    }
  }
  return est;
}

}  // namespace bowen
