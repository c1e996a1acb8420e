#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bowen/systems.hpp"

namespace bowen {

std::string library_version();

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);

/// Validated configuration with every default filled in. Unknown keys are
/// rejected with an InputError naming the key path. canonical_config is
/// idempotent.
json canonical_config(const json& raw);
std::string config_id(const json& canonical);

struct ExperimentRecord {
  std::string id;
  json config;
  json results;
  json seeds;
  json timings;
  std::string version;
  std::map<std::string, std::string> tables;  // CSV side tables by file name

  json to_json() const;
  static ExperimentRecord from_json(const json& j);
};

struct RunOptions {
  int workers = 0;
  std::optional<std::uint64_t> seed;  // overrides the config seed
};

ExperimentRecord run_experiment(const json& config, const RunOptions& opt = {});

struct SweepPoint {
  json parameters;
  std::optional<ExperimentRecord> record;
  std::string error;
};

struct SweepResult {
  json config;
  std::vector<SweepPoint> points;
  std::string aggregate_csv;  // parameter columns, rate, stderr, error
};

/// One run per grid point, axes in lexicographic order of their names.
SweepResult run_sweep(const json& config, const RunOptions& opt = {});

/// Writes <out>/<id>/record.json plus the side tables, each atomically.
std::filesystem::path write_record(const ExperimentRecord& rec, const std::filesystem::path& out);
std::filesystem::path write_sweep(const SweepResult& sweep, const std::filesystem::path& out);

struct VerifyReport {
  bool pass = true;
  std::vector<std::string> checks;    // what was checked
  std::vector<std::string> failures;  // empty when pass
  json to_json() const;
};

/// Re-checks the persisted invariants without re-running any dynamics.
VerifyReport verify_record(const json& record);
VerifyReport verify_record_file(const std::filesystem::path& path);

struct RecordSummary {
  std::string id;
  std::string experiment;
  std::filesystem::path path;
};
std::vector<RecordSummary> list_records(const std::filesystem::path& out);

json read_json_file(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace bowen
