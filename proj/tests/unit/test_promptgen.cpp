#include "doctest.h"

#include <set>

#include "commentgen/corpus.hpp"
#include "commentgen/error.hpp"
#include "commentgen/promptgen.hpp"
#include "support/support.hpp"

using namespace commentgen;

namespace {

ExemplarPool pool() { return load_exemplar_pool(testsupport::data_dir() / "exemplars.jsonl"); }

std::vector<CodeUnit> units_of(const std::string& content) {
  SourceFile f;
  f.repo_id = "r";
  f.path = "m.c";
  f.content = content;
  f.size_bytes = content.size();
  return extract_pairs(f);
}

CodeUnit unit() {
  return units_of("/* sums */\nint sum(const int *v, int n) {\n  int s = 0;\n  for (int i = 0; i < n; ++i) s += v[i];\n"
                  "  return s;\n}\n")[0];
}

ScoredChunk chunk(std::string id, std::string text, double score) {
  ScoredChunk c;
  c.chunk.chunk_id = std::move(id);
  c.chunk.text = std::move(text);
  c.score = score;
  return c;
}

CondensedAst fake_ast(std::size_t n) {
  CondensedAst a;
  a.unit_id = "u";
  for (std::size_t i = 0; i < n; ++i) {
    AstNode node;
    node.kind = i == 0 ? AstNodeKind::Function : AstNodeKind::Declaration;
    node.name = "node_" + std::to_string(i);
    node.type_text = "int";
    if (i) node.parent = 0;
    node.depth = i ? 1 : 0;
    node.origin = "n" + std::to_string(i);
    a.nodes.push_back(node);
    if (i) a.nodes[0].children.push_back(i);
  }
  return a;
}

}  // namespace

TEST_SUITE("promptgen") {
  TEST_CASE("setup names") {
    for (Setup s : kAllSetups) {
      CHECK(setup_from_string(to_string(s)) == s);
      CHECK(setup_from_string(display_name(s)) == s);
    }
    CHECK(display_name(Setup::CodeAstDoc) == "Code + AST + Design Doc");
  }

  TEST_CASE("pool invariant is enforced at construction") {
    auto p = pool();
    CHECK(p.exemplars().size() == 30);
    auto ex = p.exemplars();
    ex.pop_back();
    CHECK_THROWS_AS(ExemplarPool(ex, 0), PreconditionError);
    auto skewed = p.exemplars();
    for (auto& e : skewed) e.label = ExemplarLabel::Positive;
    CHECK_THROWS_AS(ExemplarPool(skewed, 0), PreconditionError);
  }

  TEST_CASE("prompt layout: persona first, code then instruction last") {
    auto b = build_prompt(unit(), pool(), ContextConfig::from(Setup::CodeDoc),
                          {std::nullopt, {chunk("d.md#0000", "design notes on summing", 2.0)}, std::nullopt}, 8192);
    std::string text = render_prompt(b);
    CHECK(text.rfind(std::string(kDefaultPersona), 0) == 0);
    auto doc = text.find("d.md#0000");
    auto code = text.find("int sum(");
    auto instr = text.rfind(b.instruction);
    CHECK(doc < code);
    CHECK(code < instr);
    CHECK(b.token_estimate <= b.budget);
    CHECK(b.exemplars_used().size() == 30);
    CHECK(b.code_block().text.find("/* sums */") == std::string::npos);
  }

  TEST_CASE("ast setups need an ast") {
    CHECK_THROWS_AS(build_prompt(unit(), pool(), ContextConfig::from(Setup::CodeAst), {}, 8192), PreconditionError);
  }

  TEST_CASE("over budget: lowest-score chunks go first, then ast nodes") {
    std::string filler(2000, 'x');
    PromptResources res;
    res.ast = fake_ast(60);
    res.chunks = {chunk("a#0000", filler, 3.0), chunk("b#0000", filler, 1.0), chunk("c#0000", filler, 2.0)};
    auto full = build_prompt(unit(), pool(), ContextConfig::from(Setup::CodeAstDoc), res, 100000);
    std::size_t tight = full.token_estimate - 600;
    auto b = build_prompt(unit(), pool(), ContextConfig::from(Setup::CodeAstDoc), res, tight);
    CHECK(b.token_estimate <= tight);
    std::set<std::string> kept;
    for (const auto& blk : b.context_blocks)
      if (blk.kind == BlockKind::DocChunk) kept.insert(blk.source);
    CHECK(kept.count("b#0000") == 0);
    CHECK(kept.count("a#0000") == 1);

    std::size_t bare = build_prompt(unit(), pool(), ContextConfig::from(Setup::Code), {}, 100000).token_estimate;
    auto only_ast = build_prompt(unit(), pool(), ContextConfig::from(Setup::CodeAstDoc), res, bare + 60);
    CHECK(only_ast.token_estimate <= bare + 60);
    for (const auto& blk : only_ast.context_blocks) CHECK(blk.kind != BlockKind::DocChunk);
  }

  TEST_CASE("multi-pass is required when the code alone does not fit") {
    try {
      build_prompt(unit(), pool(), ContextConfig::from(Setup::Code), {}, 50);
      FAIL("expected MultiPassRequired");
    } catch (const MultiPassRequired& e) {
      CHECK(e.budget() == 50);
      CHECK(e.needed() > 50);
    }
  }

  TEST_CASE("variants never touch the code block") {
    PromptResources res;
    res.ast = fake_ast(20);
    res.chunks = {chunk("a#0000", std::string(6000, 'a'), 2.0), chunk("b#0000", std::string(6000, 'b'), 1.0)};
    auto base = build_prompt(unit(), pool(), ContextConfig::from(Setup::CodeAstDoc), res, 16384);
    for (auto kind : {VariantKind::OrderPermutation, VariantKind::Rewording, VariantKind::ContextShrink}) {
      auto set = make_variants(base, kind, 3, 11);
      CHECK(!set.bundles.empty());
      for (const auto& v : set.bundles) {
        CHECK(v.code_block() == base.code_block());
        CHECK(v.token_estimate <= v.budget);
      }
    }
    auto order = make_variants(base, VariantKind::OrderPermutation, 2, 11);
    CHECK(order.bundles[0].exemplars_used() != base.exemplars_used());
    auto words = make_variants(base, VariantKind::Rewording, 20, 11);
    CHECK(words.bundles.size() == instruction_paraphrases().size() - 1);
    CHECK(!words.warnings.empty());
    auto shrink = make_variants(base, VariantKind::ContextShrink, 2, 11);
    for (const auto& v : shrink.bundles) CHECK(v.budget < base.token_estimate);
  }

  TEST_CASE("variants are reproducible from the seed") {
    auto base = build_prompt(unit(), pool(), ContextConfig::from(Setup::Code), {}, 8192);
    auto a = make_variants(base, VariantKind::OrderPermutation, 3, 5);
    auto b = make_variants(base, VariantKind::OrderPermutation, 3, 5);
    for (std::size_t i = 0; i < a.bundles.size(); ++i) CHECK(render_prompt(a.bundles[i]) == render_prompt(b.bundles[i]));
  }

  TEST_CASE("bundle json round trip") {
    auto b = build_prompt(unit(), pool(), ContextConfig::from(Setup::CodeDoc),
                          {std::nullopt, {chunk("d#0001", "text", 1.5)}, std::nullopt}, 8192);
    auto back = bundle_from_json(to_json(b));
    CHECK(render_prompt(back) == render_prompt(b));
    CHECK(back.setup == Setup::CodeDoc);
  }

  TEST_CASE("pass planning partitions the units") {
    std::string src;
    for (int i = 0; i < 12; ++i)
      src += "int f" + std::to_string(i) + "(int x) {\n  return x + " + std::to_string(i) + " * 1000000;\n}\n";
    src += "int huge(void) {\n" + std::string(4000, ' ') + "return 0;\n";
    for (int i = 0; i < 200; ++i) src += "  int v" + std::to_string(i) + " = " + std::to_string(i) + ";\n";
    src += "}\n";
    SourceFile f;
    f.path = "m.c";
    f.content = src;
    auto units = extract_pairs(f);
    auto plan = plan_passes(f, units, 60);
    std::multiset<std::string> seen;
    for (const auto& p : plan.passes) {
      std::size_t cost = 0;
      for (const auto& id : p.unit_ids) {
        seen.insert(id);
        for (const auto& u : units)
          if (u.id == id) cost += unit_cost(u);
      }
      CHECK(cost <= 60);
    }
    for (const auto& s : plan.skipped) seen.insert(s.unit_id);
    CHECK(seen.size() == units.size());
    for (const auto& u : units) CHECK(seen.count(u.id) == 1);
    CHECK(plan.skipped.size() == 1);
    CHECK(plan.passes.size() > 1);
    CHECK(plan.passes[1].carried_unit_ids.size() == plan.passes[0].unit_ids.size());
  }
}
