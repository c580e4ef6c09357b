#include "doctest.h"

#include <set>

#include "commentgen/astx.hpp"
#include "commentgen/corpus.hpp"
#include "commentgen/text.hpp"
#include "support/support.hpp"

using namespace commentgen;
using testsupport::fixture_dir;

namespace {

SourceFile load(const std::filesystem::path& p) {
  SourceFile f;
  f.repo_id = "fx";
  f.path = p.filename().string();
  f.language = language_for_path(p).value_or(Language::C);
  f.content = read_file(p);
  f.size_bytes = f.content.size();
  return f;
}

void collect_names(const nlohmann::json& j, std::set<std::string>& out) {
  if (j.is_object()) {
    if (j.contains("name") && j["name"].is_string()) out.insert(j["name"].get<std::string>());
    for (const auto& [k, v] : j.items()) collect_names(v, out);
  } else if (j.is_array()) {
    for (const auto& v : j) collect_names(v, out);
  }
}

}  // namespace

TEST_SUITE("astx") {
  TEST_CASE("makefile flags are recovered with expansion") {
    auto flags = recover_flags(fixture_dir() / "minirepo" / "Makefile");
    std::string all;
    for (const auto& f : flags.all()) all += f + " ";
    CHECK(all.find("-O2") != std::string::npos);
    CHECK(all.find("-Ideps") != std::string::npos);
    CHECK(all.find("-DX") != std::string::npos);
  }

  TEST_CASE("static scraping expands earlier assignments") {
    auto flags = scrape_flags("CFLAGS = -O2 -Ideps\nEXTRA=-DX\nCFLAGS += $(EXTRA)\nCPPFLAGS ?= -DY\n");
    CHECK(flags.cflags == std::vector<std::string>{"-O2", "-Ideps", "-DX"});
    CHECK(flags.cppflags == std::vector<std::string>{"-DY"});
  }

  TEST_CASE("missing makefile gives empty override flags") {
    auto flags = recover_flags("/nonexistent/Makefile");
    CHECK(flags.all().empty());
    CHECK(flags.source == FlagSource::Override);
  }

  TEST_CASE("failing tool surfaces its stderr") {
    AstToolConfig cfg;
    cfg.tool_template = "clang -Xclang -ast-dump=json -fsyntax-only {flags} {file}";
    try {
      dump_ast("/nonexistent/file.c", override_flags(""), cfg);
      FAIL("expected AstToolError");
    } catch (const AstToolError& e) {
      CHECK(!e.tool_stderr().empty());
    }
  }

  TEST_CASE("malformed dump is a ParseError with an offset") {
    CHECK_THROWS_AS(parse_ast_dump("{\"kind\": "), ParseError);
  }

  TEST_CASE("dump is byte-identical across runs and condense never invents names") {
    auto path = fixture_dir() / "tus" / "tu05.c";
    auto a = dump_ast(path, override_flags(""));
    auto b = dump_ast(path, override_flags(""));
    CHECK(a.text == b.text);
    std::set<std::string> names;
    collect_names(a.root, names);
    for (const auto& u : extract_pairs(load(path))) {
      auto c = condense(a, u, 4096);
      CHECK(c.token_estimate <= 4096);
      for (const auto& n : c.nodes)
        if (!n.name.empty()) CHECK_MESSAGE(names.count(n.name) == 1, n.name);
    }
  }

  TEST_CASE("callees of a unit are listed") {
    auto path = fixture_dir() / "tus" / "tu05.c";
    auto doc = dump_ast(path, override_flags(""));
    for (const auto& u : extract_pairs(load(path))) {
      if (u.name != "ring_push") continue;
      auto c = condense(doc, u, 4096);
      CHECK(std::find(c.callees.begin(), c.callees.end(), "ring_full") != c.callees.end());
    }
  }

  TEST_CASE("prefix truncation and json round trip") {
    auto path = fixture_dir() / "tus" / "tu10.c";
    auto doc = dump_ast(path, override_flags(""));
    auto units = extract_pairs(load(path));
    REQUIRE(!units.empty());
    auto full = condense(doc, units.back(), 4096);
    REQUIRE(full.nodes.size() > 3);
    auto small = truncate_condensed(full, 40);
    CHECK(small.token_estimate <= 40);
    CHECK(small.nodes.size() >= 1);
    for (std::size_t i = 0; i < small.nodes.size(); ++i) CHECK(small.nodes[i].origin == full.nodes[i].origin);
    auto three = take_prefix(full, 3);
    CHECK(three.nodes.size() == 3);
    CHECK(condensed_from_json(to_json(full)) == full);
    CHECK(render_condensed(full).find(units.back().name) != std::string::npos);
  }

  TEST_CASE("tiny budgets keep the root alone") {
    auto path = fixture_dir() / "tus" / "tu06.c";
    auto doc = dump_ast(path, override_flags(""));
    auto units = extract_pairs(load(path));
    auto c = condense(doc, units.front(), 1);
    CHECK(c.nodes.size() == 1);
    CHECK(c.nodes[0].kind == AstNodeKind::Function);
  }
}
