#include "doctest.h"

#include "commentgen/digest.hpp"
#include "commentgen/text.hpp"
#include "commentgen/tokenize.hpp"

using namespace commentgen;

TEST_SUITE("text") {
  TEST_CASE("token estimate rounds up") {
    CHECK(estimate_tokens(0) == 0);
    CHECK(estimate_tokens(1) == 1);
    CHECK(estimate_tokens(4) == 1);
    CHECK(estimate_tokens(5) == 2);
  }

  TEST_CASE("fixed and trimmed formatting") {
    CHECK(format_fixed(0.126, 2) == "0.13");
    CHECK(format_fixed(24.0, 2) == "24.00");
    CHECK(format_trimmed(24.0, 2) == "24");
    CHECK(format_trimmed(30.50, 2) == "30.5");
    CHECK(format_trimmed(19.77, 2) == "19.77");
  }

  TEST_CASE("whitespace helpers") {
    CHECK(trim("  a b \n") == "a b");
    CHECK(collapse_whitespace(" a \n\t b ") == "a b");
    CHECK(split_lines("a\nb\n").size() >= 2);
    CHECK(to_lower("AbC") == "abc");
  }

  TEST_CASE("identifier-aware terms") {
    auto t = tokenize_terms("dump_escaped getHTTPReply");
    std::vector<std::string> want = {"dump_escaped", "dump", "escaped", "gethttpreply", "get", "http", "reply"};
    CHECK(t == want);
    CHECK(identifier_parts("fooBar") == std::vector<std::string>{"foo", "bar"});
  }

  TEST_CASE("sha256 of a known string") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }
}
