#include "doctest.h"

#include <algorithm>
#include <random>

#include "commentgen/docstore.hpp"
#include "commentgen/error.hpp"
#include "commentgen/tokenize.hpp"
#include "oracles/oracles.hpp"
#include "support/support.hpp"

using namespace commentgen;
using testsupport::TempDir;

TEST_SUITE("docstore") {
  TEST_CASE("frequency priors") {
    CHECK(frequency_prior(DocType::UserSoftware) == 96);
    CHECK(frequency_prior(DocType::Implementation) == 72);
    CHECK(frequency_prior(DocType::ConfigurationManagement) == 64);
    CHECK(frequency_prior(DocType::Architecture) == 62);
    CHECK(frequency_prior(DocType::Test) == 48);
    CHECK(frequency_prior(DocType::ProjectManagement) == 28);
    CHECK(frequency_prior(DocType::Requirements) == 24);
    CHECK(frequency_prior(DocType::ProjectInfrastructure) == 22);
    CHECK(frequency_prior(DocType::DetailedDesign) == 16);
  }

  TEST_CASE("classification by content and path") {
    CHECK(classify_doc("docs/spec.md", "The system shall respond. Acceptance criteria: the system shall log.") ==
          DocType::Requirements);
    CHECK(classify_doc("docs/overview.md", "Each component exposes an interface. See the module diagram.") ==
          DocType::Architecture);
    CHECK(classify_doc("README", "hello") == DocType::UserSoftware);
    CHECK(classify_doc("docs/tutorial.md", "Step one.") == DocType::UserSoftware);
    CHECK(classify_doc("x.txt", "nothing in particular") == DocType::UserSoftware);
    CHECK_THROWS_AS(classify_doc("x.md", ""), PreconditionError);
    for (DocType t : kAllDocTypes) CHECK(doc_type_from_string(to_string(t)) == t);
  }

  TEST_CASE("html is reduced to text") {
    auto t = extract_plain_text("a.html", "<html><script>var x;</script><p>Hello &amp; bye</p></html>");
    CHECK(t.find("Hello & bye") != std::string::npos);
    CHECK(t.find("var x") == std::string::npos);
  }

  TEST_CASE("chunks overlap by exactly the overlap") {
    std::string text;
    for (int i = 0; i < 80; ++i) text += "Sentence number " + std::to_string(i) + " talks about timers. ";
    auto doc = make_design_doc("d.md", "d.md", text);
    auto chunks = chunk_doc(doc, 300, 50);
    REQUIRE(chunks.size() > 3);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      CHECK(chunks[i].text.size() <= 300);
      CHECK(chunks[i].ordinal == i);
      if (i == 0) continue;
      const auto& prev = chunks[i - 1];
      CHECK(chunks[i].start_offset + 50 == prev.start_offset + prev.text.size());
      CHECK(prev.text.substr(prev.text.size() - 50) == chunks[i].text.substr(0, 50));
    }
    CHECK(chunks.back().start_offset + chunks.back().text.size() == doc.content.size());
    CHECK(chunks[2].chunk_id == "d.md#0002");
    CHECK_THROWS_AS(chunk_doc(doc, 100, 100), PreconditionError);
  }

  TEST_CASE("retrieval matches the exhaustive oracle") {
    auto chunks = testsupport::fifty_chunks();
    auto index = build_index(chunks);
    auto hits = retrieve(index, "timer heap deadline", 10);
    auto want = oracle::okapi_exhaustive(index.chunks, tokenize_terms("timer heap deadline"));
    REQUIRE(hits.size() == 10);
    for (std::size_t i = 0; i < hits.size(); ++i) {
      CHECK(hits[i].chunk == want[i].chunk);
      CHECK(hits[i].score == doctest::Approx(want[i].score).epsilon(1e-12));
    }
  }

  TEST_CASE("scores do not depend on insertion order") {
    auto chunks = testsupport::fifty_chunks();
    auto a = build_index(chunks);
    std::shuffle(chunks.begin(), chunks.end(), std::mt19937_64(3));
    auto b = build_index(chunks);
    auto ha = retrieve(a, "json token escape parser", 20);
    auto hb = retrieve(b, "json token escape parser", 20);
    REQUIRE(ha.size() == hb.size());
    for (std::size_t i = 0; i < ha.size(); ++i) {
      CHECK(a.chunks[ha[i].chunk].chunk_id == b.chunks[hb[i].chunk].chunk_id);
      CHECK(ha[i].score == hb[i].score);
    }
  }

  TEST_CASE("type filter and empty query") {
    auto index = build_index(testsupport::fifty_chunks());
    for (const auto& h : retrieve(index, "timer", 50, DocType::Test)) CHECK(index.chunks[h.chunk].doc_type == DocType::Test);
    CHECK(retrieve(index, "   ", 5).empty());
    CHECK_THROWS_AS(retrieve(index, "timer", 0), PreconditionError);
    CHECK_THROWS_AS(build_index({}), PreconditionError);
  }

  TEST_CASE("index file round trip") {
    TempDir dir;
    auto index = build_index(testsupport::fifty_chunks());
    save_index(index, dir / "i.bin");
    auto back = load_index(dir / "i.bin");
    CHECK(back.chunks == index.chunks);
    CHECK(back.avg_len == index.avg_len);
    auto h1 = retrieve(index, "socket buffer", 5), h2 = retrieve(back, "socket buffer", 5);
    REQUIRE(h1.size() == h2.size());
    for (std::size_t i = 0; i < h1.size(); ++i) CHECK(h1[i].chunk == h2[i].chunk);
    write_file(dir / "bad.bin", "NOPE");
    CHECK_THROWS(load_index(dir / "bad.bin"));
  }

  TEST_CASE("loading a docs tree and querying for a unit") {
    TempDir dir;
    testsupport::generate_corpus(dir.path(), 2);
    auto docs = load_design_docs(dir / "docs");
    REQUIRE(docs.size() == 4);
    CHECK(std::is_sorted(docs.begin(), docs.end(), [](auto& a, auto& b) { return a.path < b.path; }));
    CodeUnit u;
    u.path = "src/timer0.c";
    u.signature = "int timer0_add(struct timer0_state *s, int n)";
    u.code = u.signature + " { return s->limit; }";
    u.body_begin = u.signature.size() + 1;
    std::string q = build_unit_query(u);
    CHECK(q.find("timer0_add") != std::string::npos);
    CHECK(q.find("limit") != std::string::npos);
    CHECK(q.find("timer0") != std::string::npos);
  }

  TEST_CASE("embedding retriever ranks an identical chunk first") {
    auto chunks = testsupport::fifty_chunks();
    auto index = build_index(chunks);
    EmbeddingRetriever r(index, std::make_shared<HashedTokenEmbedder>());
    auto hits = r.retrieve(index.chunks[5].text, 3);
    REQUIRE(!hits.empty());
    CHECK(hits[0].score == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(index.chunks[hits[0].chunk].text == index.chunks[5].text);
  }
}
