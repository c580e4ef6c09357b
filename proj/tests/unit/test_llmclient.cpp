#include "doctest.h"

#include <cstdlib>

#include "commentgen/corpus.hpp"
#include "commentgen/error.hpp"
#include "commentgen/llmclient.hpp"
#include "commentgen/text.hpp"
#include "support/support.hpp"

using namespace commentgen;
using testsupport::TempDir;

namespace {

CodeUnit unit() {
  SourceFile f;
  f.repo_id = "r";
  f.path = "m.c";
  f.content = "/* adds */\nint add(int a, int b) {\n  return a + b;\n}\n";
  return extract_pairs(f)[0];
}

PromptBundle bundle() {
  auto pool = load_exemplar_pool(testsupport::data_dir() / "exemplars.jsonl");
  return build_prompt(unit(), pool, ContextConfig::from(Setup::Code), {}, 8192);
}

ModelSpec http_model(std::string auth_env = "") {
  ModelSpec m;
  m.name = "remote";
  m.context_window = 100000;
  m.endpoint = "http://127.0.0.1:9";
  m.auth_env = std::move(auth_env);
  m.provider = "scripted";
  return m;
}

ClientOptions fast(std::optional<std::filesystem::path> cache = std::nullopt) {
  ClientOptions o;
  o.cache_dir = std::move(cache);
  o.initial_backoff = std::chrono::milliseconds(1);
  return o;
}

}  // namespace

TEST_SUITE("llmclient") {
  TEST_CASE("registry parsing and validation") {
    auto reg = ModelRegistry::load(testsupport::data_dir() / "models.json");
    CHECK(reg.contains("o3"));
    CHECK(reg.get("mock").provider == "mock");
    CHECK(reg.get("codestral").display_name == "Codestral 25.01");
    CHECK_THROWS_AS(ModelRegistry::from_json(nlohmann::json::parse(
                        R"({"models":[{"name":"x","context_window":10,"api_key":"sk-1"}]})")),
                    ConfigError);
    CHECK_THROWS_AS(ModelRegistry::from_json(nlohmann::json::parse(
                        R"({"models":[{"name":"x","context_window":10},{"name":"x","context_window":10}]})")),
                    ConfigError);
    CHECK_THROWS(reg.get("nope"));
  }

  TEST_CASE("mock annotation keeps the code and yields a comment") {
    auto client = LlmClient::with_defaults(fast());
    auto g = client.complete(bundle(), ModelRegistry::builtin_mock().get("mock"), {});
    CHECK(g.text.find("add") != std::string::npos);
    CHECK_FALSE(g.empty);
    REQUIRE(g.annotated_file);
    CHECK(g.annotated_file->find("return a + b;") != std::string::npos);
  }

  TEST_CASE("extraction: fenced, bare, empty and garbage") {
    auto u = unit();
    auto fenced = extract_comment("Sure:\n```c\n/* Adds two ints. */\nint add(int a, int b) {\n  return a + b;\n}\n```\n", u);
    CHECK(fenced.comment == "Adds two ints.");
    CHECK(fenced.annotated_file);
    auto bare = extract_comment("// Adds two ints.", u);
    CHECK(bare.comment == "Adds two ints.");
    auto empty = extract_comment("```c\nint add(int a, int b) {\n  return a + b;\n}\n```", u);
    CHECK(empty.empty);
    CHECK_THROWS_AS(extract_comment("I cannot help with that.", u), ExtractionError);
  }

  TEST_CASE("retries transient failures with backoff") {
    auto provider = std::make_shared<StaticProvider>(
        std::vector<ProviderResponse>{{0, "", "reset"}, {429, "", "slow down"}, {200, "// ok", ""}});
    LlmClient client({{"scripted", provider}}, fast());
    auto r = client.chat(http_model(), {RequestKind::Judge, "s", "u", nullptr}, {});
    CHECK(r.text == "// ok");
    CHECK(provider->calls() == 3);
  }

  TEST_CASE("gives up after max retries, and never retries 4xx") {
    auto always = std::make_shared<StaticProvider>(std::vector<ProviderResponse>{{503, "", "down"}});
    LlmClient client({{"scripted", always}}, fast());
    CHECK_THROWS_AS(client.chat(http_model(), {RequestKind::Judge, "s", "u", nullptr}, {}), ProviderError);
    CHECK(always->calls() == 4);
    auto bad = std::make_shared<StaticProvider>(std::vector<ProviderResponse>{{400, "", "bad request"}});
    LlmClient c2({{"scripted", bad}}, fast());
    CHECK_THROWS_AS(c2.chat(http_model(), {RequestKind::Judge, "s", "u", nullptr}, {}), ProviderError);
    CHECK(bad->calls() == 1);
  }

  TEST_CASE("context overflow: pre-check and provider report") {
    auto ok = std::make_shared<StaticProvider>(std::vector<ProviderResponse>{{200, "x", ""}});
    LlmClient client({{"scripted", ok}}, fast());
    auto small = http_model();
    small.context_window = 10;
    CHECK_THROWS_AS(client.chat(small, {RequestKind::Judge, "s", std::string(400, 'a'), nullptr}, {}), ContextOverflow);
    CHECK(ok->calls() == 0);
    auto over = std::make_shared<StaticProvider>(
        std::vector<ProviderResponse>{{400, "", R"({"error":{"code":"context_length_exceeded"}})"}});
    LlmClient c2({{"scripted", over}}, fast());
    CHECK_THROWS_AS(c2.chat(http_model(), {RequestKind::Judge, "s", "u", nullptr}, {}), ContextOverflow);
  }

  TEST_CASE("missing credentials are a configuration error") {
    ::unsetenv("CG_TEST_UNSET_KEY");
    auto ok = std::make_shared<StaticProvider>(std::vector<ProviderResponse>{{200, "x", ""}});
    LlmClient client({{"scripted", ok}}, fast());
    CHECK_THROWS_AS(client.chat(http_model("CG_TEST_UNSET_KEY"), {RequestKind::Judge, "s", "u", nullptr}, {}),
                    ConfigError);
  }

  TEST_CASE("cache hit returns the identical text and keeps secrets out") {
    TempDir dir;
    ::setenv("CG_TEST_SECRET_KEY", "sk-very-secret-123", 1);
    auto provider = std::make_shared<StaticProvider>(std::vector<ProviderResponse>{{200, "/* cached text */", ""}});
    LlmClient client({{"scripted", provider}}, fast(dir.path()));
    auto m = http_model("CG_TEST_SECRET_KEY");
    ChatRequest req{RequestKind::Judge, "s", "u", nullptr};
    auto first = client.chat(m, req, {});
    auto second = client.chat(m, req, {});
    CHECK_FALSE(first.cached);
    CHECK(second.cached);
    CHECK(first.text == second.text);
    CHECK(provider->calls() == 1);
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir.path()))
      if (e.is_regular_file()) CHECK(read_file(e.path()).find("sk-very-secret") == std::string::npos);
    CHECK(LlmClient::cache_key(m, req, {}) != LlmClient::cache_key(m, {RequestKind::Judge, "s", "v", nullptr}, {}));
    ::unsetenv("CG_TEST_SECRET_KEY");
  }

  TEST_CASE("generated records round trip") {
    TempDir dir;
    GeneratedComment g;
    g.unit_id = "u";
    g.model = "mock";
    g.setup = Setup::CodeAst;
    g.text = "line one\nline \"two\"";
    g.annotated_file = "int x;";
    save_generated({g, g}, dir / "g.jsonl");
    auto back = load_generated(dir / "g.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0].text == g.text);
    CHECK(back[0].setup == Setup::CodeAst);
    CHECK(back[0].annotated_file == g.annotated_file);
  }
}
