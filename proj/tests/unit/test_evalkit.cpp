#include "doctest.h"

#include <random>

#include "commentgen/error.hpp"
#include "commentgen/evalkit.hpp"
#include "oracles/oracles.hpp"

using namespace commentgen;

namespace {

std::string random_text(std::mt19937_64& rng) {
  static const char* words[] = {"the", "timer", "fires", "once", "heap", "min", "(", ")", ",", "returns", "n", "0"};
  std::string s;
  std::size_t n = 1 + rng() % 14;
  for (std::size_t i = 0; i < n; ++i) s += std::string(words[rng() % 12]) + " ";
  return s;
}

}  // namespace

TEST_SUITE("evalkit") {
  TEST_CASE("tokens") {
    CHECK(metric_tokens("Foo_bar(x, 2)") == std::vector<std::string>{"foo_bar", "(", "x", ",", "2", ")"});
  }

  TEST_CASE("rouge-l and bleu-4 on known values") {
    CHECK(rouge_l("a b c d", "a b c d") == doctest::Approx(1.0));
    CHECK(bleu_4("a b c d e", "a b c d e") == doctest::Approx(1.0));
    CHECK(rouge_l("a x b", "a b") == doctest::Approx(2.0 * (2.0 / 3) * 1.0 / (2.0 / 3 + 1.0)));
    CHECK(bleu_4("", "a b") == 0.0);
    CHECK_THROWS_AS(rouge_l("a", ""), PreconditionError);
  }

  TEST_CASE("bounds, identity and oracle agreement") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 100; ++i) {
      std::string a = random_text(rng), b = random_text(rng);
      double r = rouge_l(a, b), bl = bleu_4(a, b);
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
      CHECK(bl >= 0.0);
      CHECK(bl <= 1.0);
      CHECK(std::abs(r - oracle::rouge_l(a, b)) <= 1e-12);
      CHECK(std::abs(bl - oracle::bleu_4(a, b)) <= 1e-12);
      CHECK(rouge_l(a, a) == doctest::Approx(1.0));
      CHECK(bleu_4(a, a) == doctest::Approx(1.0));
    }
  }

  TEST_CASE("embedding similarity matches a brute-force greedy match") {
    HashedTokenEmbedder e;
    std::string a = "the timer fires once", b = "timer fires twice per loop";
    auto s = embed_similarity(a, b, &e);
    REQUIRE(s.available());
    auto ma = e.embed_tokens(metric_tokens(a)), mb = e.embed_tokens(metric_tokens(b));
    std::vector<std::vector<double>> va, vb;
    for (Eigen::Index i = 0; i < ma.rows(); ++i) {
      std::vector<double> row;
      for (Eigen::Index j = 0; j < ma.cols(); ++j) row.push_back(ma(i, j));
      va.push_back(row);
    }
    for (Eigen::Index i = 0; i < mb.rows(); ++i) {
      std::vector<double> row;
      for (Eigen::Index j = 0; j < mb.cols(); ++j) row.push_back(mb(i, j));
      vb.push_back(row);
    }
    CHECK(*s.value == doctest::Approx(oracle::greedy_f1(va, vb)).epsilon(1e-12));
    CHECK(*embed_similarity(a, a, &e).value == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_FALSE(embed_similarity(a, b, nullptr).available());
  }

  TEST_CASE("judge replies") {
    CHECK(parse_judge_reply("Score: 82") == doctest::Approx(0.82));
    CHECK(parse_judge_reply("I'd say 100.") == doctest::Approx(1.0));
    CHECK_FALSE(parse_judge_reply("excellent").has_value());
    CHECK_FALSE(parse_judge_reply("Score: 140").has_value());
    CHECK_FALSE(judge_score("a", "b", nullptr, nullptr).available());
    auto client = LlmClient::with_defaults();
    auto reg = ModelRegistry::builtin_mock();
    auto s1 = judge_score("adds two", "int add();", &client, &reg.get("mock"));
    auto s2 = judge_score("adds two", "int add();", &client, &reg.get("mock"));
    REQUIRE(s1.available());
    CHECK(*s1.value == *s2.value);
    CHECK(judge_prompt("c", "x").find("0") != std::string::npos);
  }

  TEST_CASE("completeness ratio ignores comments and whitespace") {
    std::string orig = "int f(void) {\n  return 1;\n}\n";
    CHECK(completeness_ratio("/* doc */\nint f(void) { return 1; }", orig) == 1.0);
    CHECK(completeness_ratio("int f(void) {", orig) == doctest::Approx(11.0 / 20.0));
    CHECK_THROWS_AS(completeness_ratio("x", "  // only a comment\n"), PreconditionError);
  }

  TEST_CASE("bias gate") {
    HashedTokenEmbedder e;
    GeneratedComment base;
    base.text = "returns the sum of the vector";
    auto same = base;
    auto other = base;
    other.text = "zebra quantum lattice purple";
    auto r = bias_gate(base, {same, same}, &e);
    CHECK(r.fraction_passing == 1.0);
    auto r2 = bias_gate(base, {same, other}, &e);
    CHECK(r2.fraction_passing == 0.5);
    CHECK_FALSE(r2.per_variant[1].pass);
    CHECK(r2.per_variant[1].similarity < kBiasThreshold);
    CHECK_THROWS_AS(bias_gate(base, {same}, nullptr), UnavailableError);
  }

  TEST_CASE("evaluate and csv") {
    CodeUnit u;
    u.id = "r:m.c#f@0";
    u.code = "int f(void) { return 1; }";
    CommentBlock c;
    c.text = "returns one";
    u.leading_comment = c;
    GeneratedComment g;
    g.unit_id = u.id;
    g.model = "mock";
    g.text = "returns one";
    g.original_code = u.code;
    g.annotated_file = "/* returns one */\n" + u.code;
    HashedTokenEmbedder e;
    auto r = evaluate(g, u, {&e, nullptr, nullptr});
    CHECK(*r.rouge_l == doctest::Approx(1.0));
    CHECK(*r.completeness == 1.0);
    CHECK(r.original_size == u.code.size());
    CHECK_FALSE(r.judge.available());
    std::string csv = metric_csv({r});
    CHECK(csv.rfind("unit_id,model,setup,rouge_l,bleu_4,embed_sim,judge_score,completeness,original_size,empty_comment,categories\n", 0) == 0);
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("q\"q") == "\"q\"\"q\"");
  }
}
