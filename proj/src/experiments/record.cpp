#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "bowen/experiments.hpp"
#include "bowen/foliation.hpp"

namespace bowen {

std::string library_version() { return BOWEN_VERSION; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

namespace {

const std::set<std::string> kExperiments = {"estimate", "growth", "sweep", "foliation-check", "continuity",
                                            "disk-vs-box"};

// Reads one JSON object, filling defaults and remembering which keys were
// consumed so the rest can be reported as unknown.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InputError(path_ + ": expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  double number(const std::string& k, double def) {
    seen_.insert(k);
    if (!j_.contains(k)) return def;
    if (!j_[k].is_number()) throw InputError(key(k) + ": expected a number");
    return j_[k].get<double>();
  }

  std::int64_t integer(const std::string& k, std::int64_t def) {
    seen_.insert(k);
    if (!j_.contains(k)) return def;
    if (!j_[k].is_number_integer()) throw InputError(key(k) + ": expected an integer");
    return j_[k].get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& k, std::uint64_t def) {
    seen_.insert(k);
    if (!j_.contains(k)) return def;
    const json& v = j_[k];
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw InputError(key(k) + ": expected a non-negative integer");
    return j_[k].get<std::uint64_t>();
  }

  bool boolean(const std::string& k, bool def) {
    seen_.insert(k);
    if (!j_.contains(k)) return def;
    if (!j_[k].is_boolean()) throw InputError(key(k) + ": expected true or false");
    return j_[k].get<bool>();
  }

  std::string string(const std::string& k, const std::string& def, const std::set<std::string>& allowed) {
    seen_.insert(k);
    if (!j_.contains(k)) return def;
    if (!j_[k].is_string()) throw InputError(key(k) + ": expected a string");
    const auto v = j_[k].get<std::string>();
    if (!allowed.empty() && !allowed.count(v)) throw InputError(key(k) + ": unknown value '" + v + "'");
    return v;
  }

  json numbers(const std::string& k, const json& def, bool integers = false) {
    seen_.insert(k);
    if (!j_.contains(k)) return def;
    const json& v = j_[k];
    if (!v.is_array() || v.empty()) throw InputError(key(k) + ": expected a nonempty array");
    for (const auto& e : v)
      if (integers ? !e.is_number_integer() : !e.is_number())
        throw InputError(key(k) + (integers ? ": expected integers" : ": expected numbers"));
    return v;
  }

  const json& raw(const std::string& k) {
    seen_.insert(k);
    return j_.at(k);
  }

  Fields child(const std::string& k) {
    seen_.insert(k);
    static const json empty = json::object();
    return Fields(j_.contains(k) ? j_[k] : empty, key(k));
  }

  std::string key(const std::string& k) const { return path_ + "." + k; }

  void done() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw InputError(key(k) + ": unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json default_point(int dim) {
  const double c[3] = {0.3, 0.2, 0.4};
  json p = json::array();
  for (int i = 0; i < dim; ++i) p.push_back(c[i]);
  return p;
}

json range_list(int lo, int hi) {
  json a = json::array();
  for (int i = lo; i <= hi; ++i) a.push_back(i);
  return a;
}

json point_field(Fields& f, const std::string& k, int dim) {
  const json p = f.numbers(k, default_point(dim));
  if (static_cast<int>(p.size()) != dim)
    throw InputError(f.key(k) + ": expected " + std::to_string(dim) + " coordinates");
  return p;
}

json schedule_or_auto(Fields& f, const std::string& k) {
  if (f.has(k)) {
    const json& v = f.raw(k);
    if (v.is_string()) {
      if (v.get<std::string>() != "auto") throw InputError(f.key(k) + ": expected a list of integers or \"auto\"");
      return "auto";
    }
    return f.numbers(k, {}, true);
  }
  return "auto";
}

json estimate_params(Fields& f) {
  json p;
  {
    Fields c = f.child("cloud");
    const auto kind = c.string("kind", "grid", {"grid", "random"});
    if (kind == "grid") {
      p["cloud"] = {{"kind", kind}, {"per_axis", c.integer("per_axis", 64)}};
    } else {
      p["cloud"] = {{"kind", kind}, {"count", c.integer("count", 4096)}};
    }
    c.done();
  }
  p["n"] = f.numbers("n", range_list(1, 8), true);
  p["delta"] = f.numbers("delta", json::array({0.2, 0.1, 0.05}));
  p["spanning"] = f.boolean("spanning", false);
  p["chain"] = f.string("chain", "delta", {"delta", "n", "none"});
  p["affine_floor"] = f.number("affine_floor", 0.05);
  p["min_window"] = f.integer("min_window", 3);
  return p;
}

json growth_params(Fields& f, int dim) {
  json p;
  p["x"] = point_field(f, "x", dim);
  p["delta"] = f.number("delta", 0.02);
  p["N"] = schedule_or_auto(f, "N");
  p["spacing_factor"] = f.number("spacing_factor", 0.1);
  return p;
}

json foliation_params(Fields& f, int dim) {
  json p;
  p["x"] = point_field(f, "x", dim);
  const json all = json::array({"segment", "holonomy", "nonexpansion", "density", "product_box"});
  json checks = json::array();
  if (f.has("checks")) {
    const json& v = f.raw("checks");
    if (!v.is_array() || v.empty()) throw InputError(f.key("checks") + ": expected a nonempty array");
    std::set<std::string> names;
    for (const auto& e : v) {
      if (!e.is_string() || std::find(all.begin(), all.end(), e) == all.end())
        throw InputError(f.key("checks") + ": unknown check " + e.dump());
      names.insert(e.get<std::string>());
    }
    for (const auto& e : all)
      if (names.count(e.get<std::string>())) checks.push_back(e);
  } else {
    checks = all;
  }
  p["checks"] = checks;
  {
    Fields s = f.child("segment");
    p["segment"] = {{"radius", s.number("radius", 0.05)}, {"spacing", s.number("spacing", 0.005)}};
    s.done();
  }
  {
    Fields h = f.child("holonomy");
    p["holonomy"] = {{"c", h.number("c", 0.3)},
                     {"depth", h.integer("depth", 2)},
                     {"radius", h.number("radius", 0.05)},
                     {"radii", h.numbers("radii", json::array({0.04, 0.02, 0.01}))}};
    h.done();
  }
  {
    Fields n = f.child("nonexpansion");
    p["nonexpansion"] = {{"samples", n.integer("samples", 200)}, {"horizon", n.integer("horizon", 50)}};
    n.done();
  }
  {
    Fields d = f.child("density");
    p["density"] = {{"K0", d.number("K0", 1.0)},
                    {"L", d.numbers("L", json::array({1.0, 2.0, 4.0, 8.0}))},
                    {"probes_per_axis", d.integer("probes_per_axis", 20)}};
    d.done();
  }
  {
    Fields b = f.child("product_box");
    p["product_box"] = {{"delta", b.number("delta", 0.05)}, {"samples_per_axis", b.integer("samples_per_axis", 5)}};
    b.done();
  }
  {
    Fields k = f.child("constants");
    const FoliationConfig d;
    p["constants"] = {{"K0", k.number("K0", d.K0)},
                      {"K1", k.number("K1", d.K1)},
                      {"K2", k.number("K2", d.K2)},
                      {"delta0", k.number("delta0", d.delta0)},
                      {"gamma", k.number("gamma", d.gamma)},
                      {"chart_radius", k.number("chart_radius", d.chart_radius)},
                      {"gt_tol", k.number("gt_tol", d.gt_tol)}};
    k.done();
  }
  return p;
}

json continuity_params(Fields& f, int dim) {
  json p;
  const auto family = f.string("family", "time_t", {"time_t", "center_shear", "constant"});
  p["family"] = family;
  p["values"] = f.numbers("values", family == "time_t" ? json::array({0.8, 0.9, 1.0, 1.1, 1.2})
                                                       : json::array({0.0, 0.01, 0.02, 0.04}));
  if (family == "center_shear") {
    if (!f.has("shape")) throw InputError(f.key("shape") + ": required for the center_shear family");
    p["shape"] = PerturbationShape::from_json(f.raw("shape")).to_json();
  }
  p["x"] = point_field(f, "x", dim);
  p["delta"] = f.number("delta", 0.02);
  p["N"] = schedule_or_auto(f, "N");
  p["spacing_factor"] = f.number("spacing_factor", 0.1);
  return p;
}

json disk_box_params(Fields& f, int dim) {
  json p;
  p["x"] = point_field(f, "x", dim);
  p["delta"] = f.numbers("delta", json::array({0.05, 0.025}));
  p["n"] = f.numbers("n", range_list(1, 6), true);
  p["separation"] = f.numbers("separation", json::array({0.02, 0.01, 0.005}));
  p["u_samples"] = f.integer("u_samples", 2049);
  p["center_samples"] = f.integer("center_samples", 5);
  p["fibre_samples"] = f.integer("fibre_samples", 3);
  return p;
}

}  // namespace

json canonical_config(const json& raw) {
  Fields top(raw, "config");
  const auto kind = top.string("experiment", "", kExperiments);
  if (kind.empty()) throw InputError("config.experiment: required");
  json c;
  c["experiment"] = kind;

  if (kind == "sweep") {
    const json base = canonical_config(top.raw("base"));
    if (base["experiment"] == "sweep") throw InputError("config.base.experiment: sweeps cannot nest");
    c["base"] = base;
    Fields g = top.child("grid");
    json grid = json::object();
    for (const char* axis : {"delta", "epsilon", "n", "t"})
      if (g.has(axis)) grid[axis] = g.numbers(axis, {}, std::string(axis) == "n");
    g.done();
    if (grid.empty()) throw InputError("config.grid: empty grid (give at least one of t, epsilon, delta, n)");
    c["grid"] = grid;
    top.done();
    return c;
  }

  c["seed"] = top.unsigned_integer("seed", 1);
  if (!top.has("system")) throw InputError("config.system: required");
  const SystemHandle sys = system_from_config(top.raw("system"));
  c["system"] = sys->config();
  const int dim = sys->dimension();

  Fields params = top.child("params");
  if (kind == "estimate") c["params"] = estimate_params(params);
  if (kind == "growth") c["params"] = growth_params(params, dim);
  if (kind == "foliation-check") c["params"] = foliation_params(params, dim);
  if (kind == "continuity") c["params"] = continuity_params(params, dim);
  if (kind == "disk-vs-box") c["params"] = disk_box_params(params, dim);
  params.done();
  top.done();
  return c;
}

std::string config_id(const json& canonical) { return sha256_hex(canonical.dump()); }

json ExperimentRecord::to_json() const {
  json names = json::array();
  for (const auto& [name, body] : tables) names.push_back(name);
  return {{"id", id},         {"config", config},   {"results", results}, {"seeds", seeds},
          {"timings", timings}, {"version", version}, {"tables", names}};
}

ExperimentRecord ExperimentRecord::from_json(const json& j) {
  ExperimentRecord r;
  for (const char* k : {"id", "config", "results", "seeds", "timings", "version"})
    if (!j.contains(k)) throw InputError(std::string("record is missing field '") + k + "'");
  r.id = j.at("id").get<std::string>();
  r.config = j.at("config");
  r.results = j.at("results");
  r.seeds = j.at("seeds");
  r.timings = j.at("timings");
  r.version = j.at("version").get<std::string>();
  return r;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::filesystem::path write_record(const ExperimentRecord& rec, const std::filesystem::path& out) {
  const auto dir = out / rec.id;
  std::filesystem::create_directories(dir);
  for (const auto& [name, body] : rec.tables) write_file_atomic(dir / name, body);
  write_file_atomic(dir / "record.json", rec.to_json().dump(2) + "\n");
  return dir / "record.json";
}

std::filesystem::path write_sweep(const SweepResult& sweep, const std::filesystem::path& out) {
  const std::string id = config_id(sweep.config);
  const auto dir = out / id;
  std::filesystem::create_directories(dir);
  json points = json::array();
  for (const auto& p : sweep.points) {
    json e = {{"parameters", p.parameters}};
    if (p.record) {
      write_record(*p.record, out);
      e["record"] = p.record->id;
    } else {
      e["error"] = p.error;
    }
    points.push_back(e);
  }
  write_file_atomic(dir / "aggregate.csv", sweep.aggregate_csv);
  const json s = {{"id", id}, {"config", sweep.config}, {"points", points}, {"version", library_version()}};
  write_file_atomic(dir / "sweep.json", s.dump(2) + "\n");
  return dir / "sweep.json";
}

std::vector<RecordSummary> list_records(const std::filesystem::path& out) {
  std::vector<RecordSummary> res;
  if (!std::filesystem::is_directory(out)) return res;
  for (const auto& entry : std::filesystem::directory_iterator(out)) {
    if (!entry.is_directory()) continue;
    for (const char* name : {"record.json", "sweep.json"}) {
      const auto p = entry.path() / name;
      if (!std::filesystem::exists(p)) continue;
      try {
        const json j = read_json_file(p);
        res.push_back({j.value("id", std::string()), j.at("config").value("experiment", std::string()), p});
      } catch (const std::exception&) {
        res.push_back({entry.path().filename().string(), "unreadable", p});
      }
    }
  }
  std::sort(res.begin(), res.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return res;
}

}  // namespace bowen
