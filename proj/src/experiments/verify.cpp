#include <cmath>
#include <map>
#include <sstream>

#include "bowen/experiments.hpp"
#include "bowen/format.hpp"

namespace bowen {

json VerifyReport::to_json() const { return {{"pass", pass}, {"checks", checks}, {"failures", failures}}; }

namespace {

class Checker {
 public:
  explicit Checker(VerifyReport& rep) : rep_(rep) {}

  void check(const std::string& what) { rep_.checks.push_back(what); }
  void fail(const std::string& msg) {
    rep_.pass = false;
    rep_.failures.push_back(msg);
  }

  // Throws when a field is missing or has the wrong type; the caller turns it
  // into an integrity failure naming the field.
  const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) throw InputError("integrity: missing field " + path + "." + key);
    return j.at(key);
  }

  void count_table(const json& est, const std::string& path) {
    const json& rows = field(est, "counts", path);
    if (!rows.is_array()) throw InputError("integrity: field " + path + ".counts is not an array");
    std::map<double, std::map<int, std::int64_t>> by_delta;
    std::map<int, std::map<double, std::int64_t>> by_n;
    const std::int64_t cloud = field(est, "cloud_size", path).get<std::int64_t>();
    check(path + ": count table monotonicity and sandwich");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string rp = path + ".counts[" + std::to_string(i) + "]";
      const int n = field(rows[i], "n", rp).get<int>();
      const double d = field(rows[i], "delta", rp).get<double>();
      const std::int64_t c = field(rows[i], "count", rp).get<std::int64_t>();
      const std::string at = "(n = " + std::to_string(n) + ", delta = " + format_double(d) + ")";
      if (c < 1 || c > cloud)
        fail(path + ": count " + std::to_string(c) + " at " + at + " outside [1, cloud size " + std::to_string(cloud) + "]");
      if (rows[i].contains("spanning_2delta")) {
        const std::int64_t b = rows[i]["spanning_2delta"].get<std::int64_t>();
        if (b > c)
          fail(path + ": sandwich violated at " + at + ": spanning count at 2·delta " + std::to_string(b) +
               " exceeds separated count " + std::to_string(c));
      }
      by_delta[d][n] = c;
      by_n[n][d] = c;
    }
    // A count that drops as n grows (fixed delta) or as delta shrinks (fixed n).
    for (const auto& [d, row] : by_delta) {
      std::int64_t prev = -1;
      int prev_n = 0;
      for (const auto& [n, c] : row) {
        if (prev >= 0 && c < prev)
          fail(path + ": monotonicity in n violated at (n = " + std::to_string(n) + ", delta = " + format_double(d) +
               "): count " + std::to_string(c) + " < " + std::to_string(prev) + " at n = " + std::to_string(prev_n));
        prev = c;
        prev_n = n;
      }
    }
    for (const auto& [n, col] : by_n) {
      std::int64_t prev = -1;
      double prev_d = 0.0;
      for (auto it = col.rbegin(); it != col.rend(); ++it) {
        const auto [d, c] = *it;
        if (prev >= 0 && c < prev)
          fail(path + ": monotonicity in delta violated at (n = " + std::to_string(n) + ", delta = " + format_double(d) +
               "): count " + std::to_string(c) + " < " + std::to_string(prev) + " at delta = " + format_double(prev_d));
        prev = c;
        prev_d = d;
      }
    }
  }

  void growth_curve(const json& gc, const std::string& path) {
    const json& N = field(gc, "N", path);
    const json& counts = field(gc, "counts", path);
    const json& arcs = field(gc, "center_arc", path);
    const double delta = field(gc, "delta", path).get<double>();
    if (N.size() != counts.size() || N.size() != arcs.size())
      throw InputError("integrity: field " + path + ".counts has a length different from " + path + ".N");
    check(path + ": growth counts nondecreasing and 4·delta center spacing");
    for (std::size_t i = 0; i < N.size(); ++i) {
      const int n = N[i].get<int>();
      const auto c = counts[i].get<std::int64_t>();
      if (i && c < counts[i - 1].get<std::int64_t>())
        fail(path + ": growth count decreases at N = " + std::to_string(n));
      if (static_cast<std::int64_t>(arcs[i].size()) != c)
        fail(path + ": N = " + std::to_string(n) + " lists " + std::to_string(arcs[i].size()) + " centers for count " +
             std::to_string(c));
      for (std::size_t k = 1; k < arcs[i].size(); ++k) {
        const double gap = arcs[i][k].get<double>() - arcs[i][k - 1].get<double>();
        if (gap < 4.0 * delta * (1.0 - 1e-12))
          fail(path + ": center spacing violated at N = " + std::to_string(n) + " between centers " +
               std::to_string(k - 1) + " and " + std::to_string(k) + ": arc gap " + format_double(gap) + " < 4·delta = " +
               format_double(4.0 * delta));
      }
    }
  }

 private:
  VerifyReport& rep_;
};

}  // namespace

VerifyReport verify_record(const json& record) {
  VerifyReport rep;
  Checker ck(rep);
  try {
    for (const char* k : {"id", "config", "results", "seeds", "timings", "version"}) ck.field(record, k, "record");
    ck.check("id matches the config hash");
    json canonical;
    try {
      canonical = canonical_config(record["config"]);
    } catch (const std::exception& e) {
      throw InputError(std::string("integrity: field record.config does not validate: ") + e.what());
    }
    if (canonical != record["config"]) ck.fail("integrity: field record.config is not in canonical form");
    if (config_id(canonical) != record["id"].get<std::string>())
      ck.fail("integrity: field record.id does not match the config hash");

    const std::string kind = record["config"]["experiment"];
    const json& res = record["results"];
    if (kind == "estimate") {
      ck.count_table(res, "results");
    } else if (kind == "growth") {
      ck.growth_curve(res, "results");
    } else if (kind == "continuity") {
      const json& curves = ck.field(res, "curves", "results");
      const json& rates = ck.field(res, "rate", "results");
      for (std::size_t i = 0; i < curves.size(); ++i) {
        const std::string p = "results.curves[" + std::to_string(i) + "]";
        ck.growth_curve(curves[i], p);
        if (ck.field(curves[i], "rate", p) != rates[i]) ck.fail(p + ": rate differs from results.rate");
      }
      ck.check("results: continuity modulus");
      double modulus = 0.0;
      for (std::size_t i = 1; i < rates.size(); ++i)
        modulus = std::max(modulus, std::abs(rates[i].get<double>() - rates[i - 1].get<double>()));
      if (modulus != ck.field(res, "modulus", "results").get<double>())
        ck.fail("results.modulus does not match the rate sequence");
    } else if (kind == "disk-vs-box") {
      const json& reports = ck.field(res, "reports", "results");
      for (std::size_t i = 0; i < reports.size(); ++i) {
        const std::string p = "results.reports[" + std::to_string(i) + "]";
        ck.count_table(ck.field(reports[i], "disk", p), p + ".disk");
        ck.count_table(ck.field(reports[i], "box", p), p + ".box");
        ck.check(p + ": difference and pass flag");
        const double diff = reports[i]["disk"]["rate"].get<double>() - reports[i]["box"]["rate"].get<double>();
        if (diff != ck.field(reports[i], "difference", p).get<double>()) ck.fail(p + ".difference does not match the rates");
        if ((std::abs(diff) <= 0.1) != ck.field(reports[i], "pass", p).get<bool>())
          ck.fail(p + ".pass disagrees with the 0.1 nat threshold");
      }
    } else if (kind == "foliation-check") {
      ck.check("results: pass flags agree with measured constants");
      if (res.contains("holonomy")) {
        const json& h = res["holonomy"];
        const bool ok = ck.field(h, "depth_consistency", "results.holonomy").get<double>() <= 1e-7 &&
                        ck.field(h, "equivariance", "results.holonomy").get<double>() <= 1e-6 &&
                        ck.field(h, "bounds_monotone", "results.holonomy").get<bool>();
        if (ok != ck.field(h, "pass", "results.holonomy").get<bool>())
          ck.fail("results.holonomy.pass disagrees with its measurements");
      }
      if (res.contains("nonexpansion")) {
        const json& n = res["nonexpansion"];
        const double m = std::max(ck.field(n, "max_ratio_forward", "results.nonexpansion").get<double>(),
                                  ck.field(n, "max_ratio_backward", "results.nonexpansion").get<double>());
        if ((m <= ck.field(n, "bound", "results.nonexpansion").get<double>()) !=
            ck.field(n, "pass", "results.nonexpansion").get<bool>())
          ck.fail("results.nonexpansion.pass disagrees with its measurements");
      }
      if (res.contains("density")) {
        const json& rows = ck.field(res["density"], "rows", "results.density");
        for (std::size_t i = 1; i < rows.size(); ++i)
          if (rows[i]["covering_radius"].get<double>() > rows[i - 1]["covering_radius"].get<double>())
            ck.fail("results.density: covering radius increases at L = " + format_double(rows[i]["L"].get<double>()));
      }
    }
  } catch (const std::exception& e) {
    rep.pass = false;
    rep.failures.push_back(e.what());
  }
  return rep;
}

VerifyReport verify_record_file(const std::filesystem::path& path) {
  json j;
  try {
    j = read_json_file(path);
  } catch (const std::exception& e) {
    VerifyReport rep;
    rep.pass = false;
    rep.failures.push_back(std::string("integrity: ") + e.what());
    return rep;
  }
  return verify_record(j);
}

}  // namespace bowen
