#include <doctest.h>

#include "genet/intent.hpp"
#include "support/generators.hpp"
#include "support/temp_dir.hpp"

using namespace genet;
using namespace genet::testing;

namespace {

SpecificationBundle sample_spec() {
  SpecificationBundle spec;
  spec.topology.nodes = {make_node("r1", "R1"),
                         make_node("sw1", "SW1", DeviceKind::Switch)};
  spec.topology.links = {make_link("r1", "sw1")};
  spec.configs.entries = {{"R1", "hostname R1\n"}, {"SW1", "hostname SW1\n"}};
  return spec;
}

const char* kEnvelopeText =
    "=== TOPOLOGY ===\n"
    "```json\n"
    "{\"nodes\": [{\"id\": \"r1\", \"label\": \"R1\", \"kind\": \"router\"},\n"
    "            {\"id\": \"sw1\", \"label\": \"SW1\", \"kind\": \"switch\"},\n"
    "            {\"id\": \"sw2\", \"label\": \"SW2\", \"kind\": \"switch\"}],\n"
    " \"links\": [{\"a\": \"r1\", \"b\": \"sw1\"}, {\"a\": \"sw1\", \"b\": \"sw2\"}]}\n"
    "```\n"
    "=== CONFIGS ===\n"
    "!=== device: R1 ===\n"
    "hostname R1\n"
    "!=== device: SW1 ===\n"
    "hostname SW1\n"
    "!=== device: SW2 ===\n"
    "hostname SW2\n"
    "=== EXPLANATION ===\n"
    "Added SW2 as a daisy-chained access switch.\n";

/// Provider returning one canned response; used for refusal paths.
class StubProvider final : public llm::ChatProvider {
 public:
  explicit StubProvider(llm::ChatResponse response)
      : response_(std::move(response)) {}
  llm::ChatResponse complete(const llm::ChatRequest&) override { return response_; }

 private:
  llm::ChatResponse response_;
};

}  // namespace

TEST_CASE("expert prompt carries five sections and both file attachments") {
  SpecificationBundle spec = sample_spec();
  Intent intent{"Add a switch for three new PCs.", Intent::TypeHint::Topology};
  llm::ChatRequest request = build_implementation_prompt(intent, spec);

  auto defaults = default_implementation_sections();
  size_t last = 0;
  for (size_t i = 0; i < 4; ++i) {
    size_t pos = request.system_instructions.find(defaults[i]);
    REQUIRE(pos != std::string::npos);
    CHECK(pos >= last);
    last = pos;
  }
  CHECK(request.system_instructions.find("=== CONFIGS ===") != std::string::npos);
  CHECK(request.system_instructions.find("{{SCHEMA}}") == std::string::npos);

  REQUIRE(request.user_parts.size() == 1);
  CHECK(std::get<std::string>(request.user_parts[0]) == intent.text);
  REQUIRE(request.attachments.size() == 2);
  CHECK(request.attachments[0].name == "topology.json");
  CHECK(request.attachments[0].content == emit_representation(spec.topology));
  CHECK(request.attachments[1].name == "configs.txt");
  CHECK(request.attachments[1].content == emit_config_bundle(spec.configs));
}

TEST_CASE("empty config bundle still yields a second, empty-bodied attachment") {
  SpecificationBundle spec = sample_spec();
  spec.configs.entries.clear();
  llm::ChatRequest request =
      build_implementation_prompt({"do nothing", {}}, spec);
  REQUIRE(request.attachments.size() == 2);
  CHECK(request.attachments[1].content.empty());
}

TEST_CASE("identical inputs produce identical requests") {
  SpecificationBundle spec = sample_spec();
  Intent intent{"Add a DMZ.", Intent::TypeHint::Topology};
  llm::ChatRequest a = build_implementation_prompt(intent, spec);
  llm::ChatRequest b = build_implementation_prompt(intent, spec);
  CHECK(a.system_instructions == b.system_instructions);
  CHECK(a.attachments[0].content == b.attachments[0].content);
  CHECK(a.attachments[1].content == b.attachments[1].content);
}

TEST_CASE("well-formed three-section envelope") {
  SpecificationBundle spec = sample_spec();
  SolutionEnvelope envelope = parse_solution_envelope(kEnvelopeText, spec.topology);
  CHECK(envelope.updated.topology.nodes.size() == 3);
  CHECK(envelope.updated.configs.entries.size() == 3);
  CHECK(envelope.explanation ==
        "Added SW2 as a daisy-chained access switch.");
}

TEST_CASE("section order does not matter") {
  std::string reordered =
      "=== EXPLANATION ===\nReordered sections.\n"
      "=== CONFIGS ===\n!=== device: R1 ===\nhostname R1\n"
      "=== TOPOLOGY ===\n"
      "{\"nodes\": [{\"id\": \"r1\", \"label\": \"R1\", \"kind\": \"router\"}]}\n";
  SolutionEnvelope envelope =
      parse_solution_envelope(reordered, TopologyRepresentation{});
  CHECK(envelope.updated.topology.nodes.size() == 1);
  CHECK(envelope.updated.configs.entries.size() == 1);
  CHECK(envelope.explanation == "Reordered sections.");
}

TEST_CASE("prose outside sentinel sections is ignored") {
  std::string chatty =
      "Sure! Here is my solution.\n"
      "=== CONFIGS ===\n!=== device: R1 ===\nhostname R1\n"
      "=== EXPLANATION ===\nDone.\n";
  SolutionEnvelope envelope =
      parse_solution_envelope(chatty, TopologyRepresentation{});
  CHECK(envelope.updated.configs.entries.size() == 1);
}

TEST_CASE("duplicate sentinel is rejected") {
  std::string doubled =
      "=== CONFIGS ===\n!=== device: R1 ===\nx\n"
      "=== CONFIGS ===\n!=== device: R2 ===\ny\n";
  try {
    parse_solution_envelope(doubled, TopologyRepresentation{});
    FAIL("expected DuplicateSection");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DuplicateSection);
  }
}

TEST_CASE("missing CONFIGS section is an error") {
  std::string no_configs = "=== EXPLANATION ===\nNothing to configure.\n";
  try {
    parse_solution_envelope(no_configs, TopologyRepresentation{});
    FAIL("expected MissingConfigSection");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingConfigSection);
  }
}

TEST_CASE("missing TOPOLOGY section falls back to the input topology") {
  SpecificationBundle spec = sample_spec();
  std::string config_only =
      "=== CONFIGS ===\n!=== device: R1 ===\nhostname R1\nbanner motd #x#\n"
      "=== EXPLANATION ===\nConfiguration-only change.\n";
  SolutionEnvelope envelope = parse_solution_envelope(config_only, spec.topology);
  CHECK(envelope.updated.topology == spec.topology);
}

TEST_CASE("unparseable section bodies are MalformedSolution") {
  std::string bad_topology =
      "=== TOPOLOGY ===\nnot a document\n"
      "=== CONFIGS ===\n!=== device: R1 ===\nx\n";
  try {
    parse_solution_envelope(bad_topology, TopologyRepresentation{});
    FAIL("expected MalformedSolution");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedSolution);
  }

  std::string bad_configs =
      "=== CONFIGS ===\n!=== device: R1 ===\nx\n!=== device: R1 ===\ny\n";
  try {
    parse_solution_envelope(bad_configs, TopologyRepresentation{});
    FAIL("expected MalformedSolution");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedSolution);
  }
}

TEST_CASE("fenced CONFIGS bodies parse like bare ones") {
  std::string fenced =
      "=== CONFIGS ===\n```\n!=== device: R1 ===\nhostname R1\n```\n";
  SolutionEnvelope envelope =
      parse_solution_envelope(fenced, TopologyRepresentation{});
  REQUIRE(envelope.updated.configs.entries.size() == 1);
  CHECK(envelope.updated.configs.entries[0].second == "hostname R1\n");
}

TEST_CASE("implement_intent over a replay transcript") {
  TempDir dir("implement");
  dir.write("implement/s01/t0/r1.txt", kEnvelopeText);
  llm::ReplayProvider provider(dir.path());

  SpecificationBundle spec = sample_spec();
  SpecificationBundle untouched = spec;
  Intent intent{"Add an access switch.", Intent::TypeHint::Topology};

  SolutionEnvelope envelope = implement_intent(
      provider, intent, spec, 0.0, {},
      llm::ReplayKey{llm::Stage::Implement, "s01", 0.0, 1});
  CHECK(envelope.updated.topology.nodes.size() == 3);
  CHECK(envelope.updated.configs.entries.size() == 3);
  CHECK(envelope.raw_response == kEnvelopeText);
  CHECK(spec == untouched);  // input is never mutated
  CHECK(envelope.updated.topology != spec.topology);
}

TEST_CASE("refusals surface as ModelRefused") {
  llm::ChatResponse refusal;
  refusal.text = "";
  refusal.finish_reason = llm::FinishReason::Refused;
  StubProvider provider(refusal);

  SpecificationBundle spec = sample_spec();
  try {
    implement_intent(provider, {"anything", {}}, spec, 0.0);
    FAIL("expected ModelRefused");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ModelRefused);
  }
}
