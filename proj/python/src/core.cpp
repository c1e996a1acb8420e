#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bowen/entropy.hpp"
#include "bowen/experiments.hpp"
#include "bowen/growth.hpp"
#include "bowen/systems.hpp"

namespace py = pybind11;
using namespace bowen;

namespace {

Point to_point(const std::vector<double>& v) { return Point(std::span<const double>(v)); }

std::vector<double> from_point(const Point& p) { return {p.x.begin(), p.x.begin() + p.dim}; }

std::vector<std::vector<double>> from_cloud(const SampleCloud& c) {
  std::vector<std::vector<double>> out;
  out.reserve(c.size());
  for (const auto& p : c.points) out.push_back(from_point(p));
  return out;
}

// Thin holder so Python sees one class whatever the concrete system is.
struct System {
  SystemHandle h;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "entropy, foliation and growth kernels";
  m.attr("__version__") = library_version();

  auto input = py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<AdmissibilityError>(m, "AdmissibilityError", input.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
  py::register_exception<ChartError>(m, "ChartError", PyExc_RuntimeError);

  py::class_<System>(m, "System")
      .def_static("from_config", [](const std::string& cfg) { return System{system_from_config(json::parse(cfg))}; })
      .def("config", [](const System& s) { return s.h->config().dump(); })
      .def_property_readonly("kind", [](const System& s) { return to_string(s.h->kind()); })
      .def_property_readonly("dimension", [](const System& s) { return s.h->dimension(); })
      .def("eval", [](const System& s, const std::vector<double>& x) { return from_point(s.h->eval(to_point(x))); })
      .def("eval_inverse",
           [](const System& s, const std::vector<double>& x) { return from_point(s.h->eval_inverse(to_point(x))); })
      .def("distance", [](const System& s, const std::vector<double>& x, const std::vector<double>& y) {
        return s.h->distance(to_point(x), to_point(y));
      });

  m.def("dn_distance", [](const System& s, const std::vector<double>& x, const std::vector<double>& y, int n) {
    return dn_distance(*s.h, to_point(x), to_point(y), n);
  });
  m.def("grid_cloud", [](const System& s, int per_axis) { return from_cloud(grid_cloud(*s.h, per_axis)); });
  m.def("random_cloud", [](const System& s, std::size_t count, std::uint64_t seed) {
    return from_cloud(random_cloud(*s.h, count, seed));
  });

  m.def(
      "entropy_estimate",
      [](const System& s, const std::vector<std::vector<double>>& points, const std::vector<int>& n,
         const std::vector<double>& delta, std::uint64_t order_seed, bool spanning, int workers) {
        std::vector<Point> pts;
        pts.reserve(points.size());
        for (const auto& p : points) pts.push_back(to_point(p));
        const SampleCloud cloud = make_cloud(*s.h, std::move(pts), "python");
        EstimatorOptions opt;
        opt.with_spanning = spanning;
        opt.workers = workers;
        py::gil_scoped_release release;
        return entropy_estimate(*s.h, cloud, n, delta, order_seed, opt).to_json().dump();
      },
      py::arg("system"), py::arg("points"), py::arg("n"), py::arg("delta"), py::arg("order_seed") = 1,
      py::arg("spanning") = false, py::arg("workers") = 1);

  m.def(
      "unstable_rate_estimate",
      [](const System& s, const std::vector<double>& x, double delta, const std::vector<int>& N) {
        py::gil_scoped_release release;
        return unstable_rate_estimate(*s.h, to_point(x), delta, N).to_json().dump();
      },
      py::arg("system"), py::arg("x"), py::arg("delta"), py::arg("N"));

  m.def("canonical_config", [](const std::string& cfg) { return canonical_config(json::parse(cfg)).dump(); });
  m.def("config_id", [](const std::string& cfg) { return config_id(json::parse(cfg)); });
  m.def("sha256_hex", &sha256_hex);
  m.def(
      "run_experiment",
      [](const std::string& cfg, int workers, std::optional<std::uint64_t> seed) {
        const json parsed = json::parse(cfg);
        RunOptions opt;
        opt.workers = workers;
        opt.seed = seed;
        py::gil_scoped_release release;
        return run_experiment(parsed, opt).to_json().dump();
      },
      py::arg("config"), py::arg("workers") = 1, py::arg("seed") = py::none());
  m.def("write_record", [](const std::string& record, const std::string& out) {
    return write_record(ExperimentRecord::from_json(json::parse(record)), out).string();
  });
  m.def("verify_record", [](const std::string& record) { return verify_record(json::parse(record)).to_json().dump(); });
}
