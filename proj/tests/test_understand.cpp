#include <doctest.h>

#include <random>

#include "genet/understand.hpp"
#include "support/generators.hpp"
#include "support/temp_dir.hpp"

using namespace genet;
using namespace genet::testing;

namespace {

std::string png_bytes() { return std::string("\x89PNG\r\n\x1a\n") + "fakebody"; }
std::string jpeg_bytes() { return std::string("\xFF\xD8\xFF\xE0") + "fakebody"; }
std::string bmp_bytes() { return std::string("BM") + "fakebody"; }

}  // namespace

TEST_CASE("image sniffing") {
  CHECK(detect_image_media_type(png_bytes()) == "image/png");
  CHECK(detect_image_media_type(jpeg_bytes()) == "image/jpeg");
  try {
    detect_image_media_type(bmp_bytes());
    FAIL("expected UnsupportedImageFormat");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnsupportedImageFormat);
  }
}

TEST_CASE("analyst prompt carries the five sections in order plus one image") {
  llm::ChatRequest request = build_understanding_prompt(png_bytes());
  const std::string& instructions = request.system_instructions;

  auto defaults = default_understanding_sections();
  size_t last = 0;
  for (size_t i = 0; i < 4; ++i) {  // section 5 contains the schema expansion
    size_t pos = instructions.find(defaults[i]);
    REQUIRE(pos != std::string::npos);
    CHECK(pos >= last);
    last = pos;
  }
  CHECK(instructions.find(schema_description()) > last);
  CHECK(instructions.find("{{SCHEMA}}") == std::string::npos);

  REQUIRE(request.user_parts.size() == 1);
  REQUIRE(std::holds_alternative<llm::ImagePart>(request.user_parts[0]));
  CHECK(std::get<llm::ImagePart>(request.user_parts[0]).media_type == "image/png");
}

TEST_CASE("BMP input is refused") {
  CHECK_THROWS_AS(build_understanding_prompt(bmp_bytes()), Error);
}

TEST_CASE("template override replaces only the named section") {
  PromptTemplate tmpl;
  tmpl.role = "You are a cartography gnome.";
  llm::ChatRequest request = build_understanding_prompt(png_bytes(), tmpl);

  auto defaults = default_understanding_sections();
  CHECK(request.system_instructions.find("cartography gnome") != std::string::npos);
  CHECK(request.system_instructions.find(defaults[0]) == std::string::npos);
  for (size_t i = 1; i < 4; ++i) {
    CHECK(request.system_instructions.find(defaults[i]) != std::string::npos);
  }
}

TEST_CASE("prompt assembly is deterministic") {
  llm::ChatRequest a = build_understanding_prompt(png_bytes());
  llm::ChatRequest b = build_understanding_prompt(png_bytes());
  CHECK(a.system_instructions == b.system_instructions);
  CHECK(std::get<llm::ImagePart>(a.user_parts[0]).bytes ==
        std::get<llm::ImagePart>(b.user_parts[0]).bytes);
}

TEST_CASE("template file: sections split on --- lines, blanks keep defaults") {
  TempDir dir("tmpl");
  dir.write("custom.txt", "Custom role line.\n---\n\n---\n\n---\n\n---\n\n");
  PromptTemplate tmpl = PromptTemplate::from_file(dir.path() / "custom.txt");
  REQUIRE(tmpl.role.has_value());
  CHECK(*tmpl.role == "Custom role line.");
  CHECK_FALSE(tmpl.task.has_value());
  CHECK_FALSE(tmpl.output_format.has_value());
}

TEST_CASE("extraction: bare fenced block") {
  std::string text = "```json\n{\"nodes\": [{\"id\": \"r1\", \"label\": \"R1\", "
                     "\"kind\": \"router\"}], \"links\": []}\n```";
  TopologyRepresentation rep = extract_representation(text);
  REQUIRE(rep.nodes.size() == 1);
  CHECK(rep.nodes[0].kind == DeviceKind::Router);
}

TEST_CASE("extraction: prose wrapping matches bare block") {
  std::string block = "{\"nodes\": [{\"id\": \"r1\", \"label\": \"R1\", "
                      "\"kind\": \"router\"}], \"links\": []}";
  std::string wrapped = "Here is the topology I found:\n\n```\n" + block +
                        "\n```\n\nLet me know if you need more detail.";
  CHECK(extract_representation(wrapped) == extract_representation(block));
}

TEST_CASE("extraction: first parseable block wins over earlier invalid one") {
  std::string text =
      "```\n{\"nodes\": [{\"id\": \"x\"}], \"links\": [{\"a\": \"x\", \"b\": "
      "\"ghost\"}]}\n```\n"
      "```\n{\"nodes\": [{\"id\": \"y\", \"label\": \"Y\", \"kind\": \"pc\"}]}\n```\n";
  TopologyRepresentation rep = extract_representation(text);
  REQUIRE(rep.nodes.size() == 1);
  CHECK(rep.nodes[0].id == "y");
}

TEST_CASE("extraction failures") {
  try {
    extract_representation("");
    FAIL("expected UnparseableModelOutput");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnparseableModelOutput);
  }
  CHECK_THROWS_AS(extract_representation("no structure here at all"), Error);
  // A JSON block without a nodes key is not a topology document.
  CHECK_THROWS_AS(extract_representation("```\n{\"links\": []}\n```"), Error);
}

TEST_CASE("extraction inverts emission") {
  std::mt19937 rng(23);
  for (int i = 0; i < 200; ++i) {
    TopologyRepresentation rep = random_representation(rng);
    CHECK(extract_representation(emit_representation(rep)) == canonicalize(rep));
  }
}

TEST_CASE("understand_topology over a replay transcript") {
  TempDir dir("understand");
  std::string triangle = R"(The image shows three routers wired in a ring.
```json
{
  "nodes": [
    {"id": "r1", "label": "R1", "kind": "router"},
    {"id": "r2", "label": "R2", "kind": "router"},
    {"id": "r3", "label": "R3", "kind": "router"}
  ],
  "links": [
    {"a": "r1", "b": "r2"},
    {"a": "r2", "b": "r3"},
    {"a": "r1", "b": "r3"}
  ]
}
```
)";
  dir.write("understand/tri/t0/r1.txt", triangle);
  llm::ReplayProvider provider(dir.path());

  UnderstandResult result = understand_topology(
      provider, png_bytes(), 0.0, {},
      llm::ReplayKey{llm::Stage::Understand, "tri", 0.0, 1});
  CHECK(result.representation.nodes.size() == 3);
  CHECK(result.representation.links.size() == 3);
  CHECK(result.raw_response == triangle);

  // Same coordinates, same value: a pure function of the key.
  UnderstandResult again = understand_topology(
      provider, png_bytes(), 0.0, {},
      llm::ReplayKey{llm::Stage::Understand, "tri", 0.0, 1});
  CHECK(again.representation == result.representation);
}

TEST_CASE("understand_topology rejects transcripts without a document") {
  TempDir dir("understand-bad");
  dir.write("understand/bad/t0/r1.txt", "I cannot make out the diagram.");
  llm::ReplayProvider provider(dir.path());
  try {
    understand_topology(provider, png_bytes(), 0.0, {},
                        llm::ReplayKey{llm::Stage::Understand, "bad", 0.0, 1});
    FAIL("expected UnparseableModelOutput");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnparseableModelOutput);
  }
}
