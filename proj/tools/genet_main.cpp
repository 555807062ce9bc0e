#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "genet/gns3_io.hpp"
#include "genet/harness.hpp"
#include "genet/intent.hpp"
#include "genet/io_util.hpp"
#include "genet/llm_gateway.hpp"
#include "genet/scoring.hpp"
#include "genet/stats.hpp"
#include "genet/understand.hpp"

namespace {

using nlohmann::json;
using namespace genet;

struct GlobalOptions {
  bool quiet = false;
  std::string format = "text";
  std::string provider_path;
};

std::unique_ptr<llm::ChatProvider> open_provider(const GlobalOptions& global) {
  std::string path = global.provider_path;
  if (path.empty()) {
    const char* env = std::getenv("GENET_PROVIDER_CONFIG");
    if (env != nullptr) path = env;
  }
  if (path.empty()) {
    raise(Errc::InvalidConfig,
          "no provider configured; pass --provider or set "
          "GENET_PROVIDER_CONFIG");
  }
  return llm::make_provider(llm::load_provider_config(path));
}

void print_document(const GlobalOptions& global, const json& doc,
                    const std::string& text_form) {
  if (global.format == "json") {
    std::cout << doc.dump(2) << "\n";
  } else if (!global.quiet) {
    std::cout << text_form;
  }
}

std::string resolve_intent_text(const std::string& arg) {
  if (!arg.empty() && arg.front() == '@') {
    return read_file(arg.substr(1));
  }
  return arg;
}

std::optional<llm::ReplayKey> replay_key_if_set(llm::Stage stage,
                                                const std::string& scenario_id,
                                                double temperature,
                                                int repetition) {
  if (scenario_id.empty()) return std::nullopt;
  return llm::ReplayKey{stage, scenario_id, temperature, repetition};
}

json tius_json(const TiusBreakdown& b) {
  json matching = json::array();
  for (const auto& pair : b.matching.pairs) {
    matching.push_back(json{{"truth_id", pair.truth_id},
                            {"extracted_id", pair.extracted_id},
                            {"similarity", pair.similarity}});
  }
  return json{{"tius", b.tius},     {"n_acc", b.n_acc},   {"nl_acc", b.nl_acc},
              {"ni_acc", b.ni_acc}, {"l_acc", b.l_acc},   {"ll_acc", b.ll_acc},
              {"lnl_acc", b.lnl_acc}, {"matching", matching}};
}

SpecificationBundle load_bundle_dir(const std::filesystem::path& dir) {
  SpecificationBundle bundle;
  bundle.topology = parse_representation(read_file(dir / "topology.json"));
  bundle.configs = parse_config_bundle(read_file(dir / "configs.txt"));
  return bundle;
}

std::vector<double> parse_temperature_list(const std::string& list) {
  std::vector<double> out;
  std::string current;
  std::istringstream in(list);
  while (std::getline(in, current, ',')) {
    if (current.empty()) continue;
    out.push_back(std::stod(current));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GeNet-style network engineering co-pilot and evaluation harness"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_flag("--quiet", global.quiet, "Suppress human-readable output");
  app.add_option("--format", global.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  app.add_option("--provider", global.provider_path,
                 "Provider config JSON (or set GENET_PROVIDER_CONFIG)");

  int exit_code = 0;
  auto run_guarded = [&](auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      std::cerr << "error: " << e.code_name() << ": " << e.what() << "\n";
      exit_code = 1;
    } catch (const std::exception& e) {
      std::cerr << "error: Internal: " << e.what() << "\n";
      exit_code = 1;
    }
  };

  // --- understand -----------------------------------------------------------
  auto* understand_cmd =
      app.add_subcommand("understand", "Extract a topology from a diagram image");
  struct {
    std::string image, out, raw, template_path, replay_scenario;
    double temperature = 0.0;
    int replay_rep = 1;
  } und;
  understand_cmd->add_option("--image", und.image)->required();
  understand_cmd->add_option("--out", und.out)->required();
  understand_cmd->add_option("--raw", und.raw);
  understand_cmd->add_option("--temperature", und.temperature);
  understand_cmd->add_option("--template", und.template_path);
  understand_cmd->add_option("--replay-scenario", und.replay_scenario,
                             "Replay key scenario id (replay provider)");
  understand_cmd->add_option("--replay-rep", und.replay_rep);
  understand_cmd->callback([&] {
    run_guarded([&] {
      auto provider = open_provider(global);
      PromptTemplate tmpl;
      if (!und.template_path.empty()) {
        tmpl = PromptTemplate::from_file(und.template_path);
      }
      auto replay =
          replay_key_if_set(llm::Stage::Understand, und.replay_scenario,
                            und.temperature, und.replay_rep);
      UnderstandResult result =
          understand_topology(*provider, read_file(und.image), und.temperature,
                              tmpl, replay);
      write_file_atomic(und.out, emit_representation(result.representation));
      if (!und.raw.empty()) write_file_atomic(und.raw, result.raw_response);
      json doc{{"out", und.out},
               {"nodes", result.representation.nodes.size()},
               {"links", result.representation.links.size()},
               {"groups", result.representation.groups.size()}};
      print_document(global, doc,
                     "extracted " + std::to_string(result.representation.nodes.size()) +
                         " nodes, " + std::to_string(result.representation.links.size()) +
                         " links -> " + und.out + "\n");
    });
  });

  // --- solve ----------------------------------------------------------------
  auto* solve_cmd =
      app.add_subcommand("solve", "Fulfil an intent against a specification");
  struct {
    std::string intent, topology, configs, out_dir, template_path, replay_scenario;
    double temperature = 0.0;
    int replay_rep = 1;
  } solve;
  solve_cmd->add_option("--intent", solve.intent, "Intent text or @file")->required();
  solve_cmd->add_option("--topology", solve.topology,
                        "Topology JSON or diagram image")->required();
  solve_cmd->add_option("--configs", solve.configs)->required();
  solve_cmd->add_option("--out-dir", solve.out_dir)->required();
  solve_cmd->add_option("--temperature", solve.temperature);
  solve_cmd->add_option("--template", solve.template_path);
  solve_cmd->add_option("--replay-scenario", solve.replay_scenario);
  solve_cmd->add_option("--replay-rep", solve.replay_rep);
  solve_cmd->callback([&] {
    run_guarded([&] {
      auto provider = open_provider(global);
      std::string topology_raw = read_file(solve.topology);

      SpecificationBundle spec;
      bool is_image = true;
      try {
        detect_image_media_type(topology_raw);
      } catch (const Error&) {
        is_image = false;
      }
      if (is_image) {
        auto replay =
            replay_key_if_set(llm::Stage::Understand, solve.replay_scenario,
                              solve.temperature, solve.replay_rep);
        spec.topology =
            understand_topology(*provider, topology_raw, solve.temperature, {},
                                replay)
                .representation;
      } else {
        spec.topology = parse_representation(topology_raw);
      }
      spec.configs = parse_config_bundle(read_file(solve.configs));

      PromptTemplate tmpl;
      if (!solve.template_path.empty()) {
        tmpl = PromptTemplate::from_file(solve.template_path);
      }
      Intent intent{resolve_intent_text(solve.intent), Intent::TypeHint::None};
      auto replay = replay_key_if_set(llm::Stage::Implement,
                                      solve.replay_scenario, solve.temperature,
                                      solve.replay_rep);
      SolutionEnvelope envelope = implement_intent(
          *provider, intent, spec, solve.temperature, tmpl, replay);

      std::filesystem::create_directories(solve.out_dir);
      std::filesystem::path out_dir(solve.out_dir);
      write_file_atomic(out_dir / "topology.json",
                        emit_representation(envelope.updated.topology));
      write_file_atomic(out_dir / "configs.txt",
                        emit_config_bundle(envelope.updated.configs));
      write_file_atomic(out_dir / "explanation.md", envelope.explanation + "\n");
      write_file_atomic(out_dir / "raw.txt", envelope.raw_response);

      json doc{{"out_dir", solve.out_dir},
               {"devices", envelope.updated.configs.entries.size()},
               {"nodes", envelope.updated.topology.nodes.size()},
               {"explanation_present", !envelope.explanation.empty()}};
      print_document(global, doc, "solution written to " + solve.out_dir + "\n");
    });
  });

  // --- score ----------------------------------------------------------------
  auto* score_cmd = app.add_subcommand("score", "Score solutions");
  score_cmd->require_subcommand(1);

  auto* tius_cmd = score_cmd->add_subcommand("tius", "Topology understanding score");
  struct {
    std::string extracted, truth, weights;
  } tius_opt;
  tius_cmd->add_option("--extracted", tius_opt.extracted)->required();
  tius_cmd->add_option("--truth", tius_opt.truth)->required();
  tius_cmd->add_option("--weights", tius_opt.weights);
  tius_cmd->callback([&] {
    run_guarded([&] {
      TiusWeights weights;
      if (!tius_opt.weights.empty()) {
        weights = parse_tius_weights(read_file(tius_opt.weights));
      }
      TiusBreakdown breakdown =
          score_tius(parse_representation(read_file(tius_opt.extracted)),
                     parse_representation(read_file(tius_opt.truth)), weights);
      std::ostringstream text;
      text << "tius " << breakdown.tius << "\n"
           << "  n " << breakdown.n_acc << "  nl " << breakdown.nl_acc << "  ni "
           << breakdown.ni_acc << "\n"
           << "  l " << breakdown.l_acc << "  ll " << breakdown.ll_acc
           << "  lnl " << breakdown.lnl_acc << "\n";
      print_document(global, tius_json(breakdown), text.str());
    });
  });

  auto* fss_cmd = score_cmd->add_subcommand("fss", "Rubric-based screening score");
  struct {
    std::string rubric, before, after, manual;
  } fss_opt;
  fss_cmd->add_option("--rubric", fss_opt.rubric)->required();
  fss_cmd->add_option("--before", fss_opt.before)->required();
  fss_cmd->add_option("--after", fss_opt.after)->required();
  fss_cmd->add_option("--manual", fss_opt.manual, "JSON map item id -> award");
  fss_cmd->callback([&] {
    run_guarded([&] {
      Rubric rubric = load_rubric(fss_opt.rubric);
      SpecificationBundle before = load_bundle_dir(fss_opt.before);
      SpecificationBundle after = load_bundle_dir(fss_opt.after);
      std::map<std::string, double> manual;
      bool has_manual = !fss_opt.manual.empty();
      if (has_manual) {
        json doc = json::parse(read_file(fss_opt.manual));
        for (const auto& [key, value] : doc.items()) {
          manual[key] = value.get<double>();
        }
      }
      FssResult result =
          apply_rubric(rubric, before, after, has_manual ? &manual : nullptr);
      json items = json::array();
      std::ostringstream text;
      text << "fss " << result.total << " / " << result.max_total << " ("
           << result.normalized << ")\n";
      for (const auto& item : result.per_item) {
        items.push_back(json{{"id", item.item_id},
                             {"awarded", item.awarded},
                             {"evidence", item.evidence}});
        text << "  " << item.item_id << ": " << item.awarded << " ("
             << item.evidence << ")\n";
      }
      json doc{{"total", result.total},
               {"max_total", result.max_total},
               {"normalized", result.normalized},
               {"items", items}};
      print_document(global, doc, text.str());
    });
  });

  // --- eval -----------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "Scenario evaluation harness");
  eval_cmd->require_subcommand(1);

  auto* eval_run_cmd = eval_cmd->add_subcommand("run", "Execute the run matrix");
  struct {
    std::string scenarios, temps = "0,0.1,0.5,0.9,1", out;
    int reps = 5;
    bool resume = false;
    int concurrency = 4;
  } eval_run;
  eval_run_cmd->add_option("--scenarios", eval_run.scenarios)->required();
  eval_run_cmd->add_option("--temps", eval_run.temps)->capture_default_str();
  eval_run_cmd->add_option("--reps", eval_run.reps)->capture_default_str();
  eval_run_cmd->add_option("--out", eval_run.out)->required();
  eval_run_cmd->add_flag("--resume", eval_run.resume,
                         "Skip runs whose record.json already exists");
  eval_run_cmd->add_option("--concurrency", eval_run.concurrency)
      ->capture_default_str();
  eval_run_cmd->callback([&] {
    run_guarded([&] {
      auto provider = open_provider(global);
      auto scenarios = harness::load_dataset(eval_run.scenarios);
      harness::RunOptions options;
      options.temperatures = parse_temperature_list(eval_run.temps);
      options.repetitions = eval_run.reps;
      options.out_dir = eval_run.out;
      options.resume = eval_run.resume;
      options.concurrency = eval_run.concurrency;
      options.quiet = global.quiet || global.format == "json";
      auto records = harness::run_matrix(scenarios, *provider, options);
      std::map<std::string, long> by_status;
      for (const auto& record : records) ++by_status[record.status];
      json doc{{"records", records.size()},
               {"status_counts", by_status},
               {"out", eval_run.out}};
      std::ostringstream text;
      text << records.size() << " runs -> " << eval_run.out << "\n";
      for (const auto& [status, count] : by_status) {
        text << "  " << status << ": " << count << "\n";
      }
      print_document(global, doc, text.str());
    });
  });

  auto* eval_report_cmd =
      eval_cmd->add_subcommand("report", "Join grader scores and aggregate");
  struct {
    std::string runs, evss, out;
    int ig_bins = 10;
  } eval_report;
  eval_report_cmd->add_option("--runs", eval_report.runs)->required();
  eval_report_cmd->add_option("--evss", eval_report.evss,
                              "Grader CSV: run_id,group_id,grader_id,score");
  eval_report_cmd->add_option("--out", eval_report.out)->required();
  eval_report_cmd->add_option("--ig-bins", eval_report.ig_bins)
      ->capture_default_str();
  eval_report_cmd->callback([&] {
    run_guarded([&] {
      auto records = harness::load_records(eval_report.runs);
      std::vector<EvssRecord> evss;
      if (!eval_report.evss.empty()) evss = load_evss_csv(eval_report.evss);
      auto report = harness::aggregate(std::move(records), evss,
                                       eval_report.ig_bins);
      harness::write_report(report, eval_report.out);
      for (const auto& warning : report.warnings) {
        std::cerr << "warning: " << warning << "\n";
      }
      json doc{{"out", eval_report.out},
               {"runs", report.records.size()},
               {"warnings", report.warnings.size()}};
      print_document(global, doc,
                     "report for " + std::to_string(report.records.size()) +
                         " runs -> " + eval_report.out + "\n");
    });
  });

  // --- stats ----------------------------------------------------------------
  auto* stats_cmd =
      app.add_subcommand("stats", "Analytics over a report CSV");
  struct {
    std::string runs;
    int ig_bins = 10;
  } stats_opt;
  stats_cmd->add_option("--runs", stats_opt.runs, "report.csv path")->required();
  stats_cmd->add_option("--ig-bins", stats_opt.ig_bins)->capture_default_str();
  stats_cmd->callback([&] {
    run_guarded([&] {
      auto rows = harness::parse_report_csv(read_file(stats_opt.runs));
      std::string analytics = harness::analytics_json(rows, stats_opt.ig_bins);
      // Single JSON document in either format; text mode adds nothing useful.
      std::cout << analytics << "\n";
    });
  });

  // --- gns3 -----------------------------------------------------------------
  auto* gns3_cmd = app.add_subcommand("gns3", "Emulator project import/export");
  gns3_cmd->require_subcommand(1);

  auto* gns3_import_cmd = gns3_cmd->add_subcommand("import", "Project -> bundle");
  struct {
    std::string project, out;
  } gi;
  gns3_import_cmd->add_option("project", gi.project, "project .gns3 file")
      ->required();
  gns3_import_cmd->add_option("--out", gi.out)->required();
  gns3_import_cmd->callback([&] {
    run_guarded([&] {
      auto result = gns3::import_project(gi.project);
      std::filesystem::create_directories(gi.out);
      std::filesystem::path out_dir(gi.out);
      write_file_atomic(out_dir / "topology.json",
                        emit_representation(result.bundle.topology));
      write_file_atomic(out_dir / "configs.txt",
                        emit_config_bundle(result.bundle.configs));
      for (const auto& warning : result.warnings) {
        std::cerr << "warning: " << warning << "\n";
      }
      json doc{{"out", gi.out},
               {"nodes", result.bundle.topology.nodes.size()},
               {"links", result.bundle.topology.links.size()},
               {"devices", result.bundle.configs.entries.size()},
               {"warnings", result.warnings.size()}};
      print_document(global, doc,
                     "imported " + std::to_string(result.bundle.topology.nodes.size()) +
                         " nodes, " + std::to_string(result.bundle.topology.links.size()) +
                         " links -> " + gi.out + "\n");
    });
  });

  auto* gns3_export_cmd = gns3_cmd->add_subcommand("export", "Bundle -> project");
  struct {
    std::string topology, configs, out, name = "genet-export";
  } ge;
  gns3_export_cmd->add_option("--topology", ge.topology)->required();
  gns3_export_cmd->add_option("--configs", ge.configs);
  gns3_export_cmd->add_option("--out", ge.out)->required();
  gns3_export_cmd->add_option("--name", ge.name)->capture_default_str();
  gns3_export_cmd->callback([&] {
    run_guarded([&] {
      SpecificationBundle bundle;
      bundle.topology = parse_representation(read_file(ge.topology));
      if (!ge.configs.empty()) {
        bundle.configs = parse_config_bundle(read_file(ge.configs));
      }
      gns3::export_project(bundle, ge.out, ge.name);
      json doc{{"out", ge.out}, {"project", ge.name + ".gns3"}};
      print_document(global, doc, "project written to " + ge.out + "\n");
    });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage diagnostic
    return 2;
  }
  return exit_code;
}
