#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "../entropy/cell_index.hpp"
#include "bowen/foliation.hpp"
#include "leaf_detail.hpp"

namespace bowen {

json NonexpansionReport::to_json() const {
  return {{"max_ratio_forward", max_ratio_forward},
          {"max_ratio_backward", max_ratio_backward},
          {"samples", samples},
          {"horizon", horizon},
          {"bound", bound},
          {"pass", pass}};
}

json DensityReport::to_json() const {
  return {{"covering_radius", covering_radius}, {"sample_count", sample_count}, {"pass", pass}};
}

namespace {

void require_center(const DynamicalSystem& sys, const char* what) {
  const auto tr = sys.traits();
  if (!tr.suspension || !tr.center_preserving)
    throw InputError(std::string(what) + " needs a time-t map or a center-preserving perturbation");
}

// `count` evenly spread indices from a polyline, always including both ends.
std::vector<Point> subsample(const LeafSegment& seg, int count) {
  if (count <= 1) return {seg.points[seg.anchor]};
  std::vector<Point> out;
  const double last = static_cast<double>(seg.points.size() - 1);
  for (int i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(std::lround(last * i / (count - 1)));
    out.push_back(seg.points[k]);
  }
  return out;
}

// Segment whose vertices are leaf points, fine enough to subsample `count` of them.
LeafSegment leaf_for_samples(const DynamicalSystem& sys, const Point& x, double radius, int count, bool unstable,
                             const FoliationConfig& cfg) {
  const double m = std::max(10.0, std::ceil((count - 1) / 2.0));
  return unstable ? unstable_segment(sys, x, radius, radius / m, cfg)
                  : stable_segment(sys, x, radius, radius / m, cfg);
}

}  // namespace

NonexpansionReport center_nonexpansion_check(const DynamicalSystem& sys, int samples, int horizon,
                                             std::uint64_t seed, const FoliationConfig& cfg) {
  require_center(sys, "center non-expansion check");
  if (samples < 1 || horizon < 1) throw InputError("samples and horizon must be >= 1");
  const auto& flow = *sys.traits().suspension;
  std::mt19937_64 rng(seed);
  NonexpansionReport rep;
  rep.samples = samples;
  rep.horizon = horizon;
  rep.bound = cfg.K2 / cfg.K1;
  for (int s = 0; s < samples; ++s) {
    const Point x0 = sys.sample(rng);
    const double c0 = cfg.K1 * (1.0 - unit_double(rng));
    const Point y0 = flow.flow(x0, c0);
    Point x = x0, y = y0;
    double c = c0;
    for (int k = 0; k < horizon; ++k) {
      c += sys.center_time(y) - sys.center_time(x);
      x = sys.eval(x);
      y = sys.eval(y);
      rep.max_ratio_forward = std::max(rep.max_ratio_forward, std::abs(c) / c0);
    }
    x = x0, y = y0, c = c0;
    for (int k = 0; k < horizon; ++k) {
      x = sys.eval_inverse(x);
      y = sys.eval_inverse(y);
      c += sys.center_time(x) - sys.center_time(y);
      rep.max_ratio_backward = std::max(rep.max_ratio_backward, std::abs(c) / c0);
    }
  }
  rep.pass = std::max(rep.max_ratio_forward, rep.max_ratio_backward) <= rep.bound;
  return rep;
}

ProductBox build_product_box(const DynamicalSystem& sys, const Point& x0, double delta, int samples_per_axis,
                             const FoliationConfig& cfg, int fibre_samples, int u_samples) {
  require_center(sys, "product box");
  if (!(delta > 0.0) || delta > cfg.delta0)
    throw InputError("product box delta must lie in (0, " + std::to_string(cfg.delta0) + "]");
  if (samples_per_axis < 1) throw InputError("samples_per_axis must be >= 1");
  const auto& flow = *sys.traits().suspension;
  const int nu = u_samples > 0 ? u_samples : samples_per_axis;
  const int nc = samples_per_axis;
  const int nf = fibre_samples > 0 ? fibre_samples : samples_per_axis;

  ProductBox box;
  box.center = sys.canonical(x0);
  box.delta = delta;
  box.samples_per_axis = samples_per_axis;
  box.x_u = subsample(leaf_for_samples(sys, box.center, delta, nu, true, cfg), nu);
  for (int j = 0; j < nc; ++j) {
    const double c = nc == 1 ? 0.0 : -delta + 2.0 * delta * j / (nc - 1);
    box.x_c.push_back(flow.flow(box.center, c));
  }

  box.a_samples.resize(static_cast<std::size_t>(nu * nc));
  for (int j = 0; j < nc; ++j) {
    const Point& xc = box.x_c[static_cast<std::size_t>(j)];
    std::vector<Point> column = box.x_u;
    if (sys.distance(xc, box.center) >= 1e-15) column = center_holonomy(sys, box.center, xc, box.x_u, 2, cfg).images;
    for (int i = 0; i < nu; ++i)
      box.a_samples[static_cast<std::size_t>(i * nc + j)] = column[static_cast<std::size_t>(i)];
  }

  // a(i, j) should sit on the flow line of x_u(i) and on the unstable leaf of x_c(j).
  for (int j = 0; j < nc; ++j) {
    const Point& xc = box.x_c[static_cast<std::size_t>(j)];
    double reach = 0.0;
    for (int i = 0; i < nu; ++i)
      reach = std::max(reach, norm(sys.chart_offset(xc, box.a_samples[static_cast<std::size_t>(i * nc + j)]), 3));
    if (reach < 1e-15) continue;
    const detail::LeafGraph leaf(sys, xc, 1.25 * reach, cfg);
    for (int i = 0; i < nu; ++i) {
      const Point& a = box.a_samples[static_cast<std::size_t>(i * nc + j)];
      const Point& xu = box.x_u[static_cast<std::size_t>(i)];
      double err = leaf.residual(a);
      try {
        const double c = flow.center_time_between(xu, a, 1e-6);
        err += sys.distance(flow.flow(xu, c), a);
      } catch (const InputError&) {
        err = std::numeric_limits<double>::infinity();
      }
      box.reconstruction_error = std::max(box.reconstruction_error, err);
    }
  }

  for (const auto& a : box.a_samples) {
    if (nf == 1) {
      box.d_samples.push_back(a);
      continue;
    }
    for (const auto& p : subsample(leaf_for_samples(sys, a, delta, nf, false, cfg), nf)) box.d_samples.push_back(p);
  }
  return box;
}

DensityReport density_check(const DynamicalSystem& sys, const Point& x0, double K0, double L,
                            const SampleCloud& probes, const FoliationConfig& cfg) {
  if (!(L >= 0.0) || !(K0 >= 0.0)) throw InputError("density check needs L >= 0 and K0 >= 0");
  if (probes.size() == 0) throw InputError("density check needs at least one probe");
  const double gamma = cfg.gamma;
  const double step = gamma / 4.0;
  const Point x = sys.canonical(x0);

  std::vector<Point> base;
  if (L > 0.0) {
    base = unstable_segment(sys, x, L, std::min(step, L / 10.0), cfg).points;
  } else {
    base = {x};
  }

  std::vector<Point> samples;
  const auto tr = sys.traits();
  if (tr.suspension && K0 > 0.0) {
    if (!tr.center_preserving) throw InputError("center sampling needs a center-preserving system");
    const int J = static_cast<int>(std::ceil(K0 / step));
    for (const auto& v : base)
      for (int j = -J; j <= J; ++j) samples.push_back(tr.suspension->flow(v, K0 * j / J));
  } else {
    samples = base;
  }

  const auto layout = sys.index_layout();
  std::vector<bool> periodic;
  for (int a = 0; a < layout.dims; ++a) periodic.push_back(layout.periodic[static_cast<std::size_t>(a)]);
  detail::CellIndex index(periodic, gamma);
  const double margin = sys.seam_margin(gamma);
  std::vector<Vec3> images;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    images.clear();
    sys.index_images(samples[i], margin, images);
    for (const auto& im : images) index.insert(index.key(im.data()), static_cast<std::uint32_t>(i));
  }

  DensityReport rep;
  rep.sample_count = samples.size();
  std::vector<std::uint64_t> keys;
  for (const auto& p : probes.points) {
    double best = std::numeric_limits<double>::infinity();
    images.clear();
    sys.index_images(p, margin, images);
    for (const auto& im : images) {
      index.neighbor_keys(im.data(), keys);
      for (auto k : keys)
        if (const auto* cell = index.find(k))
          for (auto idx : *cell) best = std::min(best, sys.distance(p, samples[idx]));
    }
    if (best > gamma)
      for (const auto& s : samples) best = std::min(best, sys.distance(p, s));
    rep.covering_radius = std::max(rep.covering_radius, best);
  }
  rep.pass = rep.covering_radius <= gamma;
  return rep;
}

}  // namespace bowen
