#include "genet/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "genet/io_util.hpp"
#include "genet/stats.hpp"
#include "genet/understand.hpp"

namespace genet::harness {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

CoverageExpectations expectations_from_json(const json& doc) {
  CoverageExpectations expectations;
  auto read_set = [&](const char* key, std::vector<std::string>& out) {
    if (!doc.contains(key)) return;
    for (const auto& entry : doc[key]) out.push_back(entry.get<std::string>());
  };
  read_set("expected_configured", expectations.expected_configured);
  read_set("reconfigure_required", expectations.reconfigure_required);
  read_set("expected_added", expectations.expected_added);
  return expectations;
}

Scenario load_scenario(const std::filesystem::path& dir) {
  std::filesystem::path manifest_path = dir / "scenario.json";
  json doc = json::parse(read_file(manifest_path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    raise(Errc::InvalidManifest, "scenario.json is not a JSON object");
  }

  Scenario scenario;
  scenario.dir = dir;
  scenario.id = doc.value("id", "");
  scenario.name = doc.value("name", "");
  scenario.scenario_type = doc.value("scenario_type", "");
  scenario.intent.text = doc.value("intent", "");
  if (scenario.id.empty()) raise(Errc::InvalidManifest, "missing id");
  if (scenario.scenario_type != "topology" &&
      scenario.scenario_type != "configuration") {
    raise(Errc::InvalidManifest,
          "scenario_type must be topology or configuration");
  }
  if (scenario.intent.text.empty()) raise(Errc::InvalidManifest, "missing intent");
  scenario.intent.hint = scenario.scenario_type == "topology"
                             ? Intent::TypeHint::Topology
                             : Intent::TypeHint::Configuration;

  scenario.image_path = dir / doc.value("image", "image.png");
  scenario.configs_path = dir / doc.value("configs", "configs.txt");
  scenario.truth_path = dir / doc.value("truth", "truth.json");
  scenario.rubric_path = dir / doc.value("rubric", "rubric.json");
  if (doc.contains("expectations")) {
    scenario.expectations = expectations_from_json(doc["expectations"]);
  }

  scenario.image_bytes = read_file(scenario.image_path);
  detect_image_media_type(scenario.image_bytes);
  scenario.truth = parse_representation(read_file(scenario.truth_path));
  scenario.configs = parse_config_bundle(read_file(scenario.configs_path));
  scenario.rubric = load_rubric(scenario.rubric_path);
  return scenario;
}

}  // namespace

std::vector<Scenario> load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    raise(Errc::InvalidManifest, "'" + dir.string() + "' is not a directory");
  }
  std::vector<std::filesystem::path> subdirs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_directory() &&
        std::filesystem::exists(entry.path() / "scenario.json")) {
      subdirs.push_back(entry.path());
    }
  }
  std::sort(subdirs.begin(), subdirs.end());

  std::vector<Scenario> scenarios;
  std::vector<std::string> failures;
  for (const auto& subdir : subdirs) {
    try {
      scenarios.push_back(load_scenario(subdir));
    } catch (const Error& e) {
      failures.push_back(subdir.filename().string() + ": " + e.what());
    }
  }
  if (!failures.empty()) {
    std::string message = "invalid scenario manifest(s):";
    for (const auto& failure : failures) message += "\n  " + failure;
    raise(Errc::InvalidManifest, message);
  }
  std::sort(scenarios.begin(), scenarios.end(),
            [](const Scenario& a, const Scenario& b) { return a.id < b.id; });
  return scenarios;
}

std::string make_run_id(const std::string& scenario_id, double temperature,
                        int repetition) {
  return scenario_id + "-t" + llm::format_temperature(temperature) + "-r" +
         std::to_string(repetition);
}

namespace {

// Model misbehavior is a scored outcome; anything else is infrastructure.
std::string status_for(const Error& e) {
  switch (e.code()) {
    case Errc::ModelRefused:
      return "model_refused";
    case Errc::UnparseableModelOutput:
    case Errc::MissingConfigSection:
    case Errc::DuplicateSection:
    case Errc::MalformedSolution:
    case Errc::MalformedRepresentation:
    case Errc::DanglingReference:
    case Errc::DuplicateDevice:
    case Errc::MissingDelimiter:
      return "malformed_solution";
    default:
      return "error";
  }
}

json tius_to_json(const TiusBreakdown& tius) {
  json matching = json::array();
  for (const auto& pair : tius.matching.pairs) {
    matching.push_back(json{{"truth_id", pair.truth_id},
                            {"extracted_id", pair.extracted_id},
                            {"similarity", pair.similarity}});
  }
  return json{{"n_acc", tius.n_acc},   {"nl_acc", tius.nl_acc},
              {"ni_acc", tius.ni_acc}, {"l_acc", tius.l_acc},
              {"ll_acc", tius.ll_acc}, {"lnl_acc", tius.lnl_acc},
              {"tius", tius.tius},     {"matching", matching}};
}

TiusBreakdown tius_from_json(const json& doc) {
  TiusBreakdown tius;
  tius.n_acc = doc.value("n_acc", 0.0);
  tius.nl_acc = doc.value("nl_acc", 0.0);
  tius.ni_acc = doc.value("ni_acc", 0.0);
  tius.l_acc = doc.value("l_acc", 0.0);
  tius.ll_acc = doc.value("ll_acc", 0.0);
  tius.lnl_acc = doc.value("lnl_acc", 0.0);
  tius.tius = doc.value("tius", 0.0);
  if (doc.contains("matching")) {
    for (const auto& pair : doc["matching"]) {
      tius.matching.pairs.push_back({pair.value("truth_id", ""),
                                     pair.value("extracted_id", ""),
                                     pair.value("similarity", 0.0)});
    }
  }
  return tius;
}

json coverage_to_json(const CoverageReport& coverage) {
  return json{
      {"configured",
       {{"hits", coverage.configured_hits},
        {"expected", coverage.configured_expected},
        {"fraction", coverage.configured_fraction}}},
      {"reconfigured",
       {{"hits", coverage.reconfigured_hits},
        {"expected", coverage.reconfigured_expected},
        {"fraction", coverage.reconfigured_fraction}}},
      {"added",
       {{"hits", coverage.added_hits},
        {"expected", coverage.added_expected},
        {"fraction", coverage.added_fraction}}},
  };
}

CoverageReport coverage_from_json(const json& doc) {
  CoverageReport coverage;
  coverage.configured_hits = doc["configured"].value("hits", 0L);
  coverage.configured_expected = doc["configured"].value("expected", 0L);
  coverage.configured_fraction = doc["configured"].value("fraction", 1.0);
  coverage.reconfigured_hits = doc["reconfigured"].value("hits", 0L);
  coverage.reconfigured_expected = doc["reconfigured"].value("expected", 0L);
  coverage.reconfigured_fraction = doc["reconfigured"].value("fraction", 1.0);
  coverage.added_hits = doc["added"].value("hits", 0L);
  coverage.added_expected = doc["added"].value("expected", 0L);
  coverage.added_fraction = doc["added"].value("fraction", 1.0);
  return coverage;
}

}  // namespace

std::string record_to_json(const RunRecord& record) {
  json fss_items = json::array();
  for (const auto& item : record.fss.per_item) {
    fss_items.push_back(json{{"id", item.item_id},
                             {"awarded", item.awarded},
                             {"evidence", item.evidence}});
  }
  json doc{
      {"run_id", record.run_id},
      {"scenario_id", record.scenario_id},
      {"scenario_type", record.scenario_type},
      {"temperature", record.temperature},
      {"repetition", record.repetition},
      {"status", record.status},
      {"error", record.error},
      {"tius", tius_to_json(record.tius)},
      {"fss",
       {{"total", record.fss.total},
        {"max_total", record.fss.max_total},
        {"normalized", record.fss.normalized},
        {"items", fss_items}}},
      {"coverage", record.coverage ? coverage_to_json(*record.coverage)
                                   : json(nullptr)},
      {"evss", record.evss ? json(*record.evss) : json(nullptr)},
      {"s3z", record.s3z ? json(*record.s3z) : json(nullptr)},
      {"artifacts", record.artifacts},
  };
  return doc.dump(2) + "\n";
}

RunRecord record_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    raise(Errc::InvalidManifest, "run record is not a JSON object");
  }
  RunRecord record;
  record.run_id = doc.value("run_id", "");
  record.scenario_id = doc.value("scenario_id", "");
  record.scenario_type = doc.value("scenario_type", "");
  record.temperature = doc.value("temperature", 0.0);
  record.repetition = doc.value("repetition", 1);
  record.status = doc.value("status", "ok");
  record.error = doc.value("error", "");
  if (doc.contains("tius")) record.tius = tius_from_json(doc["tius"]);
  if (doc.contains("fss")) {
    const json& fss = doc["fss"];
    record.fss.total = fss.value("total", 0.0);
    record.fss.max_total = fss.value("max_total", 0.0);
    record.fss.normalized = fss.value("normalized", 0.0);
    if (fss.contains("items")) {
      for (const auto& item : fss["items"]) {
        record.fss.per_item.push_back({item.value("id", ""),
                                       item.value("awarded", 0.0),
                                       item.value("evidence", "")});
      }
    }
  }
  if (doc.contains("coverage") && !doc["coverage"].is_null()) {
    record.coverage = coverage_from_json(doc["coverage"]);
  }
  if (doc.contains("evss") && !doc["evss"].is_null()) {
    record.evss = doc["evss"].get<double>();
  }
  if (doc.contains("s3z") && !doc["s3z"].is_null()) {
    record.s3z = doc["s3z"].get<double>();
  }
  if (doc.contains("artifacts")) {
    for (const auto& [key, value] : doc["artifacts"].items()) {
      record.artifacts[key] = value.get<std::string>();
    }
  }
  return record;
}

RunRecord run_single(const Scenario& scenario, llm::ChatProvider& provider,
                     double temperature, int repetition,
                     const std::string& model_id) {
  RunRecord record;
  record.run_id = make_run_id(scenario.id, temperature, repetition);
  record.scenario_id = scenario.id;
  record.scenario_type = scenario.scenario_type;
  record.temperature = temperature;
  record.repetition = repetition;
  record.fss.max_total = scenario.rubric.max_total();

  // Stage 1: image analysis, scored against the ground truth.
  TopologyRepresentation extracted;
  try {
    llm::ChatRequest request =
        build_understanding_prompt(scenario.image_bytes, {});
    request.temperature = temperature;
    request.model_id = model_id;
    request.replay =
        llm::ReplayKey{llm::Stage::Understand, scenario.id, temperature,
                       repetition};
    llm::ChatResponse response = provider.complete(request);
    record.raw_understand = response.text;
    if (response.finish_reason == llm::FinishReason::Refused) {
      raise(Errc::ModelRefused, "model refused the analysis request");
    }
    extracted = extract_representation(response.text);
    record.tius = score_tius(extracted, scenario.truth);
  } catch (const Error& e) {
    record.status = status_for(e);
    record.error = std::string("understand: ") + e.what();
    return record;
  }

  // Stage 2: intent fulfilment over the stage-1 extraction.
  try {
    SpecificationBundle input{extracted, scenario.configs};
    llm::ChatRequest request =
        build_implementation_prompt(scenario.intent, input, {});
    request.temperature = temperature;
    request.model_id = model_id;
    request.replay =
        llm::ReplayKey{llm::Stage::Implement, scenario.id, temperature,
                       repetition};
    llm::ChatResponse response = provider.complete(request);
    record.raw_implement = response.text;
    if (response.finish_reason == llm::FinishReason::Refused) {
      raise(Errc::ModelRefused, "model refused the intent request");
    }
    SolutionEnvelope envelope =
        parse_solution_envelope(response.text, input.topology);

    // FSS and coverage compare against the scenario's pre-intent state:
    // ground-truth topology plus input configs.
    SpecificationBundle before{scenario.truth, scenario.configs};
    record.fss = apply_rubric(scenario.rubric, before, envelope.updated);
    record.coverage = coverage_metrics(scenario.configs, envelope.updated.configs,
                                       scenario.expectations);
    record.solution_topology = emit_representation(envelope.updated.topology);
    record.solution_configs = emit_config_bundle(envelope.updated.configs);
    record.explanation = envelope.explanation;
  } catch (const Error& e) {
    record.status = status_for(e);
    record.error = std::string("implement: ") + e.what();
    record.fss = FssResult{};
    record.fss.max_total = scenario.rubric.max_total();
    record.coverage.reset();
  }
  return record;
}

namespace {

void persist_record(RunRecord& record, const std::filesystem::path& out_dir) {
  std::filesystem::path run_dir = out_dir / "runs" / record.run_id;
  std::filesystem::create_directories(run_dir);
  auto emit = [&](const char* name, const char* file, const std::string& body) {
    if (body.empty()) return;
    write_file_atomic(run_dir / file, body);
    record.artifacts[name] = file;
  };
  emit("understand_raw", "understand_raw.txt", record.raw_understand);
  emit("implement_raw", "implement_raw.txt", record.raw_implement);
  emit("topology", "topology.json", record.solution_topology);
  emit("configs", "configs.txt", record.solution_configs);
  emit("explanation", "explanation.md", record.explanation);
  write_file_atomic(run_dir / "record.json", record_to_json(record));
}

}  // namespace

std::vector<RunRecord> run_matrix(const std::vector<Scenario>& scenarios,
                                  llm::ChatProvider& provider,
                                  const RunOptions& options) {
  if (options.temperatures.empty()) {
    raise(Errc::InvalidRequest, "temperature list is empty");
  }
  if (options.repetitions < 1) {
    raise(Errc::InvalidRequest, "repetitions must be >= 1");
  }

  struct Task {
    const Scenario* scenario;
    double temperature;
    int repetition;
  };
  std::vector<Task> tasks;
  for (const auto& scenario : scenarios) {
    for (double temperature : options.temperatures) {
      for (int rep = 1; rep <= options.repetitions; ++rep) {
        tasks.push_back({&scenario, temperature, rep});
      }
    }
  }

  std::vector<RunRecord> records(tasks.size());
  std::atomic<size_t> next{0};
  std::mutex io_mutex;

  auto worker = [&] {
    while (true) {
      size_t index = next.fetch_add(1);
      if (index >= tasks.size()) break;
      const Task& task = tasks[index];
      std::string run_id =
          make_run_id(task.scenario->id, task.temperature, task.repetition);

      std::filesystem::path record_path;
      if (!options.out_dir.empty()) {
        record_path = options.out_dir / "runs" / run_id / "record.json";
      }
      if (options.resume && !record_path.empty() &&
          std::filesystem::exists(record_path)) {
        records[index] = record_from_json(read_file(record_path));
        continue;
      }

      RunRecord record = run_single(*task.scenario, provider, task.temperature,
                                    task.repetition, options.model_id);
      if (!options.out_dir.empty()) {
        persist_record(record, options.out_dir);
      }
      if (!options.quiet) {
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cerr << record.run_id << " " << record.status << " tius="
                  << fmt_double(record.tius.tius)
                  << " fss=" << fmt_double(record.fss.total) << "\n";
      }
      records[index] = std::move(record);
    }
  };

  int thread_count = std::max(1, std::min<int>(options.concurrency,
                                               static_cast<int>(tasks.size())));
  std::vector<std::thread> threads;
  threads.reserve(thread_count);
  for (int i = 0; i < thread_count; ++i) threads.emplace_back(worker);
  for (auto& thread : threads) thread.join();
  return records;
}

std::vector<RunRecord> load_records(const std::filesystem::path& out_dir) {
  std::filesystem::path runs_dir = out_dir / "runs";
  if (!std::filesystem::is_directory(runs_dir)) {
    raise(Errc::IoError, "'" + runs_dir.string() + "' is not a directory");
  }
  std::vector<RunRecord> records;
  for (const auto& entry : std::filesystem::directory_iterator(runs_dir)) {
    std::filesystem::path record_path = entry.path() / "record.json";
    if (entry.is_directory() && std::filesystem::exists(record_path)) {
      records.push_back(record_from_json(read_file(record_path)));
    }
  }
  return records;
}

namespace {

bool record_order(const RunRecord& a, const RunRecord& b) {
  return std::tie(a.scenario_id, a.temperature, a.repetition) <
         std::tie(b.scenario_id, b.temperature, b.repetition);
}

struct GroupStats {
  long runs = 0;
  double tius_sum = 0.0;
  double fss_norm_sum = 0.0;
  long s3z_count = 0;
  double s3z_sum = 0.0;
  double evss_sum = 0.0;

  void add(const RunRecord& record) {
    ++runs;
    tius_sum += record.tius.tius;
    fss_norm_sum += record.fss.normalized;
    if (record.s3z) {
      ++s3z_count;
      s3z_sum += *record.s3z;
      evss_sum += *record.evss;
    }
  }

  json to_json() const {
    json out{{"runs", runs},
             {"mean_tius", runs ? tius_sum / runs : 0.0},
             {"mean_fss_normalized", runs ? fss_norm_sum / runs : 0.0}};
    out["mean_s3z"] = s3z_count ? json(s3z_sum / s3z_count) : json(nullptr);
    out["mean_evss"] = s3z_count ? json(evss_sum / s3z_count) : json(nullptr);
    return out;
  }
};

}  // namespace

EvaluationReport aggregate(std::vector<RunRecord> records,
                           const std::vector<EvssRecord>& evss_records,
                           int ig_bins) {
  std::sort(records.begin(), records.end(), record_order);

  std::map<std::string, std::pair<double, long>> evss_by_run;
  std::set<std::string> known_runs;
  for (const auto& record : records) known_runs.insert(record.run_id);
  for (const auto& evss : evss_records) {
    if (!known_runs.count(evss.run_id)) {
      raise(Errc::JoinError, "grader row for unknown run_id '" + evss.run_id + "'");
    }
    auto& [sum, count] = evss_by_run[evss.run_id];
    sum += evss.score;
    ++count;
  }

  EvaluationReport report;
  std::vector<size_t> joined_indices;
  std::vector<double> joined_fss, joined_evss;
  for (size_t i = 0; i < records.size(); ++i) {
    auto it = evss_by_run.find(records[i].run_id);
    if (it == evss_by_run.end()) {
      records[i].evss.reset();
      records[i].s3z.reset();
      if (!evss_records.empty()) {
        report.warnings.push_back("run '" + records[i].run_id +
                                  "' has no grader score; excluded from S3-Z");
      }
      continue;
    }
    double mean_score = it->second.first / it->second.second;
    records[i].evss = mean_score;
    joined_indices.push_back(i);
    joined_fss.push_back(records[i].fss.normalized);
    joined_evss.push_back(mean_score);
  }
  if (joined_indices.size() >= 2) {
    std::vector<double> standardized = s3z(joined_fss, joined_evss);
    for (size_t k = 0; k < joined_indices.size(); ++k) {
      records[joined_indices[k]].s3z = standardized[k];
    }
  }

  // Report CSV, one row per run, sorted.
  std::ostringstream csv;
  csv << "run_id,scenario_id,scenario_type,temperature,repetition,status,"
         "tius,n_acc,nl_acc,ni_acc,l_acc,ll_acc,lnl_acc,"
         "fss_total,fss_normalized,evss,s3z\n";
  for (const auto& r : records) {
    csv << r.run_id << ',' << r.scenario_id << ',' << r.scenario_type << ','
        << llm::format_temperature(r.temperature) << ',' << r.repetition << ','
        << r.status << ',' << fmt_double(r.tius.tius) << ','
        << fmt_double(r.tius.n_acc) << ',' << fmt_double(r.tius.nl_acc) << ','
        << fmt_double(r.tius.ni_acc) << ',' << fmt_double(r.tius.l_acc) << ','
        << fmt_double(r.tius.ll_acc) << ',' << fmt_double(r.tius.lnl_acc) << ','
        << fmt_double(r.fss.total) << ',' << fmt_double(r.fss.normalized) << ',';
    if (r.evss) csv << fmt_double(*r.evss);
    csv << ',';
    if (r.s3z) csv << fmt_double(*r.s3z);
    csv << '\n';
  }
  report.csv = csv.str();

  // Aggregates.
  std::map<std::string, GroupStats> by_scenario, by_temperature, by_type;
  std::map<std::string, long> by_status;
  CoverageReport pooled;
  for (const auto& r : records) {
    by_scenario[r.scenario_id].add(r);
    by_temperature[llm::format_temperature(r.temperature)].add(r);
    by_type[r.scenario_type].add(r);
    ++by_status[r.status];
    if (r.coverage) {
      pooled.configured_hits += r.coverage->configured_hits;
      pooled.configured_expected += r.coverage->configured_expected;
      pooled.reconfigured_hits += r.coverage->reconfigured_hits;
      pooled.reconfigured_expected += r.coverage->reconfigured_expected;
      pooled.added_hits += r.coverage->added_hits;
      pooled.added_expected += r.coverage->added_expected;
    }
  }
  auto pooled_fraction = [](long hits, long expected) {
    return expected == 0 ? 1.0
                         : static_cast<double>(hits) / static_cast<double>(expected);
  };

  json aggregate_doc;
  aggregate_doc["runs"] = records.size();
  aggregate_doc["status_counts"] = by_status;
  auto group_json = [](const std::map<std::string, GroupStats>& groups) {
    json out = json::object();
    for (const auto& [key, stats] : groups) out[key] = stats.to_json();
    return out;
  };
  aggregate_doc["per_scenario"] = group_json(by_scenario);
  aggregate_doc["per_temperature"] = group_json(by_temperature);
  aggregate_doc["per_type"] = group_json(by_type);
  aggregate_doc["coverage"] = json{
      {"configured",
       {{"hits", pooled.configured_hits},
        {"expected", pooled.configured_expected},
        {"fraction",
         pooled_fraction(pooled.configured_hits, pooled.configured_expected)}}},
      {"reconfigured",
       {{"hits", pooled.reconfigured_hits},
        {"expected", pooled.reconfigured_expected},
        {"fraction", pooled_fraction(pooled.reconfigured_hits,
                                     pooled.reconfigured_expected)}}},
      {"added",
       {{"hits", pooled.added_hits},
        {"expected", pooled.added_expected},
        {"fraction", pooled_fraction(pooled.added_hits, pooled.added_expected)}}},
  };

  // Same analytics as the stats CLI, computed over the in-memory rows.
  std::vector<ReportRow> rows;
  for (const auto& r : records) {
    ReportRow row;
    row.run_id = r.run_id;
    row.scenario_id = r.scenario_id;
    row.scenario_type = r.scenario_type;
    row.temperature = llm::format_temperature(r.temperature);
    row.repetition = r.repetition;
    row.status = r.status;
    row.tius = r.tius.tius;
    row.fss_normalized = r.fss.normalized;
    row.evss = r.evss;
    row.s3z = r.s3z;
    rows.push_back(std::move(row));
  }
  aggregate_doc["analytics"] = json::parse(analytics_json(rows, ig_bins));

  report.aggregate_json = aggregate_doc.dump(2) + "\n";
  report.records = std::move(records);
  return report;
}

void write_report(const EvaluationReport& report,
                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file_atomic(out_dir / "report.csv", report.csv);
  write_file_atomic(out_dir / "aggregate.json", report.aggregate_json);
}

std::vector<ReportRow> parse_report_csv(const std::string& text) {
  std::vector<ReportRow> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("run_id", 0) == 0) continue;
    }
    std::vector<std::string> fields;
    std::istringstream fields_in(line);
    std::string field;
    while (std::getline(fields_in, field, ',')) fields.push_back(field);
    fields.resize(17);
    ReportRow row;
    row.run_id = fields[0];
    row.scenario_id = fields[1];
    row.scenario_type = fields[2];
    row.temperature = fields[3];
    row.repetition = std::atoi(fields[4].c_str());
    row.status = fields[5];
    row.tius = std::atof(fields[6].c_str());
    row.fss_normalized = std::atof(fields[14].c_str());
    if (!fields[15].empty()) row.evss = std::atof(fields[15].c_str());
    if (!fields[16].empty()) row.s3z = std::atof(fields[16].c_str());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string analytics_json(const std::vector<ReportRow>& rows, int ig_bins) {
  std::vector<std::string> scenario_labels, temperature_labels, type_labels;
  std::vector<double> tius_values;
  for (const auto& row : rows) {
    scenario_labels.push_back(row.scenario_id);
    temperature_labels.push_back(row.temperature);
    type_labels.push_back(row.scenario_type);
    tius_values.push_back(row.tius);
  }

  json doc;
  auto guarded_ig = [&](const std::vector<std::string>& labels) -> json {
    try {
      return stats::info_gain(labels, tius_values, ig_bins);
    } catch (const Error&) {
      return nullptr;
    }
  };
  doc["info_gain"] = json{{"scenario", guarded_ig(scenario_labels)},
                          {"temperature", guarded_ig(temperature_labels)},
                          {"scenario_type", guarded_ig(type_labels)}};

  json pearson_doc = json::object();
  for (const std::string type : {"topology", "configuration"}) {
    std::vector<double> x, y;
    for (const auto& row : rows) {
      if (row.scenario_type == type && row.s3z) {
        x.push_back(row.tius);
        y.push_back(*row.s3z);
      }
    }
    try {
      pearson_doc[type] = json{{"r", stats::pearson(x, y)}, {"runs", x.size()}};
    } catch (const Error& e) {
      pearson_doc[type] = json{{"r", nullptr}, {"runs", x.size()},
                               {"note", e.what()}};
    }
  }
  doc["pearson_tius_vs_s3z"] = pearson_doc;

  std::vector<double> topology_s3z, configuration_s3z;
  for (const auto& row : rows) {
    if (!row.s3z) continue;
    (row.scenario_type == "topology" ? topology_s3z : configuration_s3z)
        .push_back(*row.s3z);
  }
  try {
    auto t = stats::t_test_ind(topology_s3z, configuration_s3z);
    doc["t_test_s3z_topology_vs_configuration"] =
        json{{"t", t.t}, {"df", t.df}};
  } catch (const Error& e) {
    doc["t_test_s3z_topology_vs_configuration"] =
        json{{"t", nullptr}, {"note", e.what()}};
  }
  try {
    auto w = stats::levene(topology_s3z, configuration_s3z);
    doc["levene_s3z_topology_vs_configuration"] =
        json{{"w", w.w}, {"df1", w.df1}, {"df2", w.df2}};
  } catch (const Error& e) {
    doc["levene_s3z_topology_vs_configuration"] =
        json{{"w", nullptr}, {"note", e.what()}};
  }
  return doc.dump(2);
}

}  // namespace genet::harness
