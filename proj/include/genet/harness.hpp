#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genet/intent.hpp"
#include "genet/llm_gateway.hpp"
#include "genet/scoring.hpp"
#include "genet/topo_model.hpp"

namespace genet::harness {

struct Scenario {
  std::string id;
  std::string name;
  std::string scenario_type;  // "topology" or "configuration"
  Intent intent;
  std::filesystem::path dir;
  std::filesystem::path image_path;
  std::filesystem::path configs_path;
  std::filesystem::path truth_path;
  std::filesystem::path rubric_path;
  CoverageExpectations expectations;

  // Parsed up front so a bad asset fails at load time, not mid-sweep.
  std::string image_bytes;
  TopologyRepresentation truth;
  DeviceConfigBundle configs;
  Rubric rubric;
};

/// Loads every `<dir>/<scenario>/scenario.json`, sorted by id. Validation
/// failures are aggregated into one InvalidManifest naming each scenario.
std::vector<Scenario> load_dataset(const std::filesystem::path& dir);

std::string make_run_id(const std::string& scenario_id, double temperature,
                        int repetition);

struct RunRecord {
  std::string run_id;
  std::string scenario_id;
  std::string scenario_type;
  double temperature = 0.0;
  int repetition = 1;
  std::string status = "ok";  // ok | model_refused | malformed_solution | error
  std::string error;

  TiusBreakdown tius;  // zeros when the run failed
  FssResult fss;
  std::optional<CoverageReport> coverage;
  std::optional<double> evss;
  std::optional<double> s3z;

  std::map<std::string, std::string> artifacts;  // name -> relative path

  // Artifact payloads carried for persistence; not part of record.json.
  std::string raw_understand;
  std::string raw_implement;
  std::string solution_topology;
  std::string solution_configs;
  std::string explanation;
};

std::string record_to_json(const RunRecord& record);
RunRecord record_from_json(const std::string& text);

struct RunOptions {
  std::vector<double> temperatures;
  int repetitions = 1;
  std::filesystem::path out_dir;  // empty disables persistence
  bool resume = false;
  int concurrency = 4;
  bool quiet = true;
  std::string model_id;
};

/// Executes the |scenarios| x |temperatures| x repetitions matrix. Per-run
/// failures are captured in the record's status with zeroed scores; the
/// sweep itself never aborts. Records are persisted incrementally under
/// `<out_dir>/runs/<run_id>/` with raw transcripts alongside.
std::vector<RunRecord> run_matrix(const std::vector<Scenario>& scenarios,
                                  llm::ChatProvider& provider,
                                  const RunOptions& options);

/// One cell of the matrix; exposed for targeted tests.
RunRecord run_single(const Scenario& scenario, llm::ChatProvider& provider,
                     double temperature, int repetition,
                     const std::string& model_id = {});

std::vector<RunRecord> load_records(const std::filesystem::path& out_dir);

struct EvaluationReport {
  std::vector<RunRecord> records;  // sorted, with evss and s3z joined in
  std::string csv;
  std::string aggregate_json;
  std::vector<std::string> warnings;
};

/// Joins grader scores by run_id (mean across graders), standardizes over
/// exactly the joined set, and computes the aggregate tables and analytics.
EvaluationReport aggregate(std::vector<RunRecord> records,
                           const std::vector<EvssRecord>& evss_records,
                           int ig_bins = 10);

void write_report(const EvaluationReport& report,
                  const std::filesystem::path& out_dir);

/// Minimal view of one report.csv row, for the analytics CLI.
struct ReportRow {
  std::string run_id;
  std::string scenario_id;
  std::string scenario_type;
  std::string temperature;
  int repetition = 1;
  std::string status;
  double tius = 0.0;
  double fss_normalized = 0.0;
  std::optional<double> evss;
  std::optional<double> s3z;
};

std::vector<ReportRow> parse_report_csv(const std::string& text);

/// IG per factor, Pearson per type, and the topology-vs-configuration t and
/// Levene statistics, as a JSON document.
std::string analytics_json(const std::vector<ReportRow>& rows, int ig_bins);

}  // namespace genet::harness
