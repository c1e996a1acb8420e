#include <set>

#include "bowen/systems.hpp"

namespace bowen {

namespace {

void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw InputError(where + ": unknown key '" + key + "'");
}

IntMatrix matrix_from(const json& j) {
  if (!j.is_array() || j.empty()) throw InputError("system.matrix: expected a nonempty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  IntMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      throw InputError("system.matrix: expected a square matrix");
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number_integer()) throw InputError("system.matrix: entries must be integers");
      m(i, k) = v.get<std::int64_t>();
    }
  }
  return m;
}

}  // namespace

SystemHandle system_from_config(const json& c) {
  if (!c.is_object()) throw InputError("system: expected an object");
  if (!c.contains("kind")) throw InputError("system: missing key 'kind'");
  const std::string kind = c.at("kind").get<std::string>();
  if (kind == "toral") {
    allow_keys(c, {"kind", "matrix"}, "system");
    return toral_map(matrix_from(c.at("matrix")));
  }
  if (kind == "endomorphism") {
    allow_keys(c, {"kind", "matrix"}, "system");
    return toral_endomorphism(matrix_from(c.at("matrix")));
  }
  if (kind == "suspension" || kind == "time_t") {
    allow_keys(c, {"kind", "matrix", "roof", "t"}, "system");
    const Roof roof = c.contains("roof") ? Roof::from_json(c.at("roof")) : Roof(1.0);
    auto flow = std::make_shared<const SuspensionFlow>(ToralAutomorphism(matrix_from(c.at("matrix"))), roof);
    return time_t_map(flow, c.value("t", 1.0));
  }
  if (kind == "perturbed") {
    allow_keys(c, {"kind", "reference", "epsilon", "shape"}, "system");
    const SystemHandle ref = system_from_config(c.at("reference"));
    return perturbed_map(ref, c.value("epsilon", 0.0), PerturbationShape::from_json(c.at("shape")));
  }
  throw InputError("system.kind: unknown kind '" + kind + "'");
}

json point_to_json(const Point& p) {
  json a = json::array();
  for (int i = 0; i < p.dim; ++i) a.push_back(p[i]);
  return a;
}

Point point_from_json(const json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw InputError("point must be an array of " + std::to_string(dim) + " numbers");
  std::vector<double> c;
  for (const auto& v : j) {
    if (!v.is_number()) throw InputError("point coordinates must be numbers");
    c.push_back(v.get<double>());
  }
  return Point(std::span<const double>(c));
}

}  // namespace bowen
