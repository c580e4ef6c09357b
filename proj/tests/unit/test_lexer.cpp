#include "doctest.h"

#include <random>

#include "commentgen/error.hpp"
#include "commentgen/lexer.hpp"
#include "support/support.hpp"

using namespace commentgen;

TEST_SUITE("lexer") {
  TEST_CASE("line and block comments are removed") {
    CHECK(strip_comments("int a; // note\nint b;") == "int a; \nint b;");
    CHECK(strip_comments("a /* x\ny */ b") == "a  \n b");
  }

  TEST_CASE("comment markers inside literals survive") {
    std::string src = "const char *s = \"// not /* a comment\"; char c = '/'; // real\n";
    std::string out = strip_comments(src);
    CHECK(out.find("\"// not /* a comment\"") != std::string::npos);
    CHECK(out.find("real") == std::string::npos);
  }

  TEST_CASE("raw strings, escapes and digit separators") {
    std::string src = "auto r = R\"d(/* )\" */)d\"; int n = 1'000; // x\nauto e = \"\\\"//\";";
    std::string out = strip_comments(src);
    CHECK(out.find("R\"d(/* )\" */)d\"") != std::string::npos);
    CHECK(out.find("1'000") != std::string::npos);
    CHECK(out.find("\"\\\"//\"") != std::string::npos);
    CHECK(out.find("// x") == std::string::npos);
  }

  TEST_CASE("backslash-continued line comment swallows the next line") {
    std::string out = strip_comments("// a \\\nstill comment\nint x;");
    CHECK(out.find("still") == std::string::npos);
    CHECK(out.find("int x;") != std::string::npos);
  }

  TEST_CASE("unterminated block comment reports its offset") {
    try {
      strip_comments("int a; /* open");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset() == 7);
    }
  }

  TEST_CASE("segments cover the input contiguously") {
    std::string src = "int a = 1; /* b */ \"c\" 'd' // e\n";
    auto segs = lex_segments(src);
    REQUIRE(!segs.empty());
    CHECK(segs.front().begin == 0);
    CHECK(segs.back().end == src.size());
    for (std::size_t i = 1; i < segs.size(); ++i) CHECK(segs[i].begin == segs[i - 1].end);
  }

  TEST_CASE("masking keeps length and newlines") {
    std::string src = "x = \"a\\nb\"; /* c\nd */ y;";
    std::string m = mask_comments_and_literals(src);
    CHECK(m.size() == src.size());
    CHECK(std::count(m.begin(), m.end(), '\n') == std::count(src.begin(), src.end(), '\n'));
    CHECK(m.find('c') == std::string::npos);
  }

  TEST_CASE("adjacent line comments merge into one block") {
    auto blocks = collect_comment_blocks("// one\n// two\nint f();\n\n// three\n");
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].text == "one\ntwo");
    CHECK(blocks[1].text == "three");
  }

  TEST_CASE("comment text drops delimiters and leading stars") {
    CHECK(comment_text("/**\n * Hello.\n * World.\n */") == "Hello.\nWorld.");
    CHECK(classify_comment_style("/** x */") == CommentStyle::Doxygen);
    CHECK(classify_comment_style("/* x */") == CommentStyle::Block);
    CHECK(classify_comment_style("// x") == CommentStyle::Line);
  }

  TEST_CASE("property: literals intact and stripping idempotent") {
    std::mt19937_64 rng(7);
    for (std::size_t i = 0; i < 300; ++i) {
      auto c = testsupport::literal_case(rng, i);
      std::string once = strip_comments(c.source);
      CHECK(strip_comments(once) == once);
      std::size_t pos = 0;
      for (const auto& lit : c.literals) {
        auto at = once.find(lit, pos);
        REQUIRE_MESSAGE(at != std::string::npos, c.source);
        pos = at + lit.size();
      }
      CHECK(once.find("CMT") == std::string::npos);
    }
  }
}
