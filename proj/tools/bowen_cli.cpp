#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "bowen/experiments.hpp"
#include "bowen/parallel.hpp"

namespace {

struct Common {
  std::string config;
  std::string out = "runs";
  int workers = 0;
  std::uint64_t seed = 0;
  bool has_seed = false;
};

bowen::RunOptions options(const Common& c) {
  bowen::RunOptions o;
  o.workers = c.workers > 0 ? c.workers : bowen::default_workers();
  if (c.has_seed) o.seed = c.seed;
  return o;
}

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
  auto* cfg = cmd->add_option("--config", c.config, "experiment configuration (JSON)");
  if (needs_config) cfg->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--workers", c.workers, "worker threads (default: hardware parallelism)");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&c](const std::uint64_t& s) { c.seed = s, c.has_seed = true; }, "override the config seed");
}

int do_run(const Common& c) {
  const auto rec = bowen::run_experiment(bowen::read_json_file(c.config), options(c));
  const auto path = bowen::write_record(rec, c.out);
  std::cout << rec.id << "  " << rec.config["experiment"].get<std::string>() << "  " << path.string() << "\n";
  if (rec.results.contains("rate")) std::cout << "rate " << rec.results["rate"].dump() << "\n";
  return 0;
}

int do_sweep(const Common& c) {
  const auto sw = bowen::run_sweep(bowen::read_json_file(c.config), options(c));
  const auto path = bowen::write_sweep(sw, c.out);
  std::size_t failed = 0;
  for (const auto& p : sw.points) failed += p.record ? 0 : 1;
  std::cout << path.string() << "\n" << sw.aggregate_csv;
  if (failed) std::cerr << failed << " of " << sw.points.size() << " grid points failed\n";
  return failed ? 1 : 0;
}

int do_verify(const std::string& record) {
  const auto rep = bowen::verify_record_file(record);
  for (const auto& c : rep.checks) std::cout << "checked: " << c << "\n";
  for (const auto& f : rep.failures) std::cout << "FAIL: " << f << "\n";
  std::cout << (rep.pass ? "PASS" : "FAIL") << "\n";
  return rep.pass ? 0 : 1;
}

int do_list(const Common& c) {
  for (const auto& r : bowen::list_records(c.out))
    std::cout << r.id << "  " << r.experiment << "  " << r.path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entropy, foliation and growth experiments on toral and suspension models"};
  app.set_version_flag("--version", bowen::library_version());
  app.require_subcommand(1);

  Common run_c, sweep_c, list_c;
  std::string record;
  auto* run = app.add_subcommand("run", "run one experiment and write its record");
  add_common(run, run_c, true);
  auto* sweep = app.add_subcommand("sweep", "run a parameter grid and write an aggregate table");
  add_common(sweep, sweep_c, true);
  auto* verify = app.add_subcommand("verify", "re-check the invariants stored in a record");
  verify->add_option("record", record, "path to record.json")->required();
  auto* list = app.add_subcommand("list", "list records in the output directory");
  list->add_option("--out", list_c.out, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return do_run(run_c);
    if (*sweep) return do_sweep(sweep_c);
    if (*verify) return do_verify(record);
    if (*list) return do_list(list_c);
  } catch (const bowen::AdmissibilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
