#include "doctest.h"

#include "commentgen/corpus.hpp"
#include "commentgen/error.hpp"
#include "commentgen/text.hpp"
#include "support/support.hpp"

using namespace commentgen;
using testsupport::TempDir;

namespace {

SourceFile source(std::string content, std::string path = "a.c") {
  SourceFile f;
  f.repo_id = "r";
  f.path = std::move(path);
  f.language = language_for_path(f.path).value_or(Language::C);
  f.content = std::move(content);
  f.size_bytes = f.content.size();
  return f;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("language by extension") {
    CHECK(language_for_path("x.c") == Language::C);
    CHECK(language_for_path("x.h") == Language::C);
    CHECK(language_for_path("x.cpp") == Language::CPP);
    CHECK(language_for_path("x.hpp") == Language::CPP);
    CHECK_FALSE(language_for_path("x.py").has_value());
  }

  TEST_CASE("leading comments attach to the next definition") {
    auto units = extract_pairs(source("/* adds */\nint add(int a, int b) { return a + b; }\n\n"
                                      "int plain(void) { return 0; }\n\n"
                                      "// far\n\n\nint far(void) { return 1; }\n"));
    REQUIRE(units.size() == 3);
    CHECK(units[0].name == "add");
    REQUIRE(units[0].leading_comment);
    CHECK(units[0].leading_comment->text == "adds");
    CHECK_FALSE(units[1].leading_comment);
    CHECK_FALSE(units[2].leading_comment);
    CHECK(units[0].code == "int add(int a, int b) { return a + b; }");
  }

  TEST_CASE("class scope, namespaces and qualified names") {
    auto units = extract_pairs(source("namespace ns {\nstruct S {\n  // m\n  int m() const { return 1; }\n};\n"
                                      "int S2::f(int x) { return x; }\n}\n",
                                      "a.cpp"));
    REQUIRE(units.size() == 2);
    CHECK(units[0].name.find("m") != std::string::npos);
    CHECK(units[0].leading_comment);
    CHECK(units[1].name == "S2::f");
  }

  TEST_CASE("braces in literals and #if 0 branches do not unbalance") {
    auto units = extract_pairs(source("#if 0\nint f(int a) {\n#else\nint f(int a, int b) {\n#endif\n"
                                      "  const char *s = \"{\"; char c = '}';\n  return a;\n}\n"));
    REQUIRE(units.size() == 1);
    CHECK(units[0].name == "f");
  }

  TEST_CASE("unbalanced braces raise ParseError") {
    CHECK_THROWS_AS(extract_pairs(source("int f() { if (1) { return 0; }\n")), ParseError);
  }

  TEST_CASE("body span holds balanced braces") {
    auto units = extract_pairs(source("int g(void) { { } return 0; }\nvoid h(void) { }\n"));
    for (const auto& u : units) {
      int depth = 0;
      std::string body = u.code.substr(u.body_begin - u.start_byte);
      for (char c : body) depth += c == '{' ? 1 : c == '}' ? -1 : 0;
      CHECK(depth == 0);
      CHECK(body.front() == '{');
      CHECK(body.back() == '}');
    }
  }

  TEST_CASE("export and import round trip field for field") {
    TempDir dir;
    testsupport::generate_corpus(dir.path(), 4);
    auto scan = scan_repo(dir.path());
    std::vector<CodeUnit> units;
    for (const auto& f : scan.files) {
      auto u = extract_pairs(f);
      units.insert(units.end(), u.begin(), u.end());
    }
    REQUIRE(units.size() > 10);
    auto out = dir / "pairs.jsonl";
    CHECK(export_dataset(units, out) == units.size());
    auto back = import_dataset(out);
    std::sort(units.begin(), units.end(), [](const CodeUnit& a, const CodeUnit& b) {
      return std::tie(a.repo_id, a.path, a.start_byte) < std::tie(b.repo_id, b.path, b.start_byte);
    });
    CHECK(back == units);
  }

  TEST_CASE("scan order is deterministic and honours ignores") {
    TempDir dir;
    testsupport::generate_corpus(dir.path(), 5);
    write_file(dir / "build/gen.c", "int x(void) { return 0; }\n");
    write_file(dir / "third_party/v.c", "int y(void) { return 0; }\n");
    auto a = scan_repo(dir.path());
    auto b = scan_repo(dir.path());
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i].path == b.files[i].path);
    for (const auto& f : a.files) {
      CHECK(f.path.rfind("build/", 0) != 0);
      CHECK(f.path.rfind("third_party/", 0) != 0);
    }
    CHECK(path_ignored("deep/build/x.c", {"build"}));
    CHECK(path_ignored("src/gen/x.c", {"src/*/x.c"}));
    CHECK_FALSE(path_ignored("src/x.c", {"build"}));
  }

  TEST_CASE("missing root is an IoError") {
    CHECK_THROWS_AS(scan_repo("/nonexistent/for/sure"), IoError);
  }

  TEST_CASE("header expansion handles guards and cycles") {
    TempDir dir;
    write_file(dir / "a.h", "#pragma once\n#include \"b.h\"\nint a; // a\n");
    write_file(dir / "b.h", "#include \"a.h\"\nint b;\n");
    write_file(dir / "m.c", "#include \"a.h\"\n#include \"a.h\"\n#include <stdio.h>\nint main(void) { return 0; }\n");
    auto e = expand_headers(dir / "m.c", {dir.path()});
    CHECK(e.text.find("int b;") != std::string::npos);
    CHECK(e.text.find("#include <stdio.h>") != std::string::npos);
    CHECK(e.text.find("// a") == std::string::npos);
    auto first = e.text.find("int a;");
    CHECK(e.text.find("int a;", first + 1) == std::string::npos);
  }
}
