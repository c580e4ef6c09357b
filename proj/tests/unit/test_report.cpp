#include "doctest.h"

#include <algorithm>
#include <random>

#include "commentgen/corpus.hpp"
#include "commentgen/docstore.hpp"
#include "commentgen/error.hpp"
#include "commentgen/report.hpp"
#include "commentgen/text.hpp"
#include "support/support.hpp"

using namespace commentgen;
using testsupport::TempDir;

namespace {

MetricReport report(std::string unit, std::string model, Setup setup, double v, std::size_t size = 100) {
  MetricReport r;
  r.unit_id = std::move(unit);
  r.model = std::move(model);
  r.setup = setup;
  r.rouge_l = v;
  r.bleu_4 = v / 2;
  r.embed_sim.value = v;
  r.completeness = 1.0;
  r.original_size = size;
  return r;
}

// Writes mined pairs for a small generated corpus and returns a manifest.
Manifest small_manifest(const TempDir& dir, std::size_t files) {
  testsupport::generate_corpus(dir / "repo", files);
  ScanConfig cfg;
  cfg.repo_id = "fx";
  std::vector<CodeUnit> units;
  for (const auto& f : scan_repo(dir / "repo", cfg).files) {
    auto u = extract_pairs(f);
    units.insert(units.end(), u.begin(), u.end());
  }
  export_dataset(units, dir / "pairs.jsonl");
  std::vector<DocChunk> chunks;
  for (const auto& d : load_design_docs(dir / "repo" / "docs")) {
    auto c = chunk_doc(d);
    chunks.insert(chunks.end(), c.begin(), c.end());
  }
  save_index(build_index(chunks), dir / "index.bin");
  nlohmann::json j = {{"name", "t"},
                      {"pairs", "pairs.jsonl"},
                      {"index", "index.bin"},
                      {"exemplars", (testsupport::data_dir() / "exemplars.jsonl").string()},
                      {"models", {"mock"}},
                      {"setups", {"code", "code+doc"}},
                      {"seed", 5},
                      {"embedder", "hashed"},
                      {"judge", "mock"},
                      {"out_dir", "runs"}};
  return manifest_from_json(j, dir.path());
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("similarity aggregation is order independent") {
    std::vector<MetricReport> rs;
    for (int i = 0; i < 9; ++i) rs.push_back(report("u" + std::to_string(i), i % 2 ? "a" : "b", kAllSetups[i % 4], i / 10.0));
    auto t1 = table_similarity(rs, {"b", "a"});
    std::shuffle(rs.begin(), rs.end(), std::mt19937_64(2));
    auto t2 = table_similarity(rs, {"b", "a"});
    CHECK(render_similarity_table(t1) == render_similarity_table(t2));
    CHECK(similarity_csv(t1) == similarity_csv(t2));
    CHECK(t1.rows[0].model == "b");
    CHECK_THROWS_AS(table_similarity({}), PreconditionError);
  }

  TEST_CASE("empty cells render as a dash") {
    auto t = table_similarity({report("u", "m", Setup::Code, 0.5)});
    std::string row = render_similarity_row(t.rows[0]);
    CHECK(row == "m | 0.50 0.25 0.50 — | — — — — | — — — — | — — — —");
  }

  TEST_CASE("completeness curve buckets by powers of two") {
    std::vector<MetricReport> rs = {report("a", "m", Setup::Code, 0, 3), report("b", "m", Setup::Code, 0, 100),
                                    report("c", "m", Setup::Code, 0, 120)};
    rs[2].completeness = 0.5;
    auto curve = completeness_curve(rs);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].bucket_low == 2);
    CHECK(curve[0].bucket_high == 4);
    CHECK(curve[1].bucket_low == 64);
    CHECK(curve[1].n == 2);
    CHECK(curve[1].mean_completeness == doctest::Approx(0.75));
    CHECK(completeness_svg(curve).find("<svg") != std::string::npos);
    CHECK(completeness_csv(curve).find("model") == 0);
  }

  TEST_CASE("times: missing column is reported with the columns found") {
    try {
      parse_times_csv("participant,model,task,minutes\np1,o3,bug,10\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      std::string msg = e.what();
      CHECK(msg.find("setup") != std::string::npos);
      CHECK(msg.find("participant") != std::string::npos);
    }
  }

  TEST_CASE("times: doc setup starred when clearly faster than every other setup") {
    std::string csv = "participant,model,setup,task,minutes\n";
    int p = 0;
    auto add = [&](std::string model, std::string setup, double base, int n) {
      for (int i = 0; i < n; ++i)
        csv += "p" + std::to_string(p++) + "," + model + "," + setup + ",bug," + std::to_string(base + (i % 5)) + "\n";
    };
    add("No Comments", "", 30, 20);
    add("Original", "", 25, 20);
    add("m", "code", 35, 20);
    add("m", "code+ast", 36, 20);
    add("m", "code+doc", 15, 20);
    add("m", "code+ast+doc", 34, 20);
    auto tables = time_analysis(parse_times_csv(csv));
    REQUIRE(tables.size() == 1);
    const auto& t = tables[0];
    CHECK(t.task == "bug");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].cells[2].starred);
    CHECK_FALSE(t.rows[0].cells[0].starred);
    CHECK(*t.rows[0].cells[2].mean == doctest::Approx(17.0));
    CHECK(*t.original == doctest::Approx(27.0));
    CHECK(*t.rows[0].cells[2].reduction_vs_original == doctest::Approx((27.0 - 17.0) / 27.0));
    auto pooled = time_analysis(parse_times_csv(csv), Binning::PooledMedian);
    CHECK(pooled[0].rows[0].cells[2].starred);
    CHECK(times_csv(tables).find("bug") != std::string::npos);
  }

  TEST_CASE("times: a degenerate contingency table warns instead of starring") {
    std::string csv = "participant,model,setup,task,minutes\n";
    for (std::string s : {"code", "code+ast", "code+doc", "code+ast+doc"})
      for (int i = 0; i < 3; ++i) csv += "p," + std::string("m,") + s + ",t,10\n";
    csv += "p,No Comments,,t,50\n";
    auto tables = time_analysis(parse_times_csv(csv));
    CHECK_FALSE(tables[0].rows[0].cells[2].starred);
    CHECK(!tables[0].warnings.empty());
  }

  TEST_CASE("means table with stars and baselines") {
    auto t = time_table_from_means(read_file(testsupport::fixture_dir() / "tables" / "table4b_means.csv"), "enh");
    CHECK(*t.original == 35.05);
    auto o3 = std::find_if(t.rows.begin(), t.rows.end(), [](auto& r) { return r.model == "o3"; });
    REQUIRE(o3 != t.rows.end());
    CHECK(render_time_row(*o3, " / ") == "28.32 / 33.55 / 25* / 32.36");
    CHECK(*o3->cells[2].reduction_vs_original == doctest::Approx((35.05 - 25.0) / 35.05));
  }

  TEST_CASE("manifest parsing and validation") {
    TempDir dir;
    auto m = manifest_from_json({{"pairs", "p.jsonl"}, {"exemplars", "e.jsonl"}, {"models", {"mock"}}}, dir.path());
    CHECK(m.setups.size() == 4);
    CHECK(m.budget == 8192);
    CHECK(resolve(m, m.pairs) == dir / "p.jsonl");
    CHECK_THROWS(manifest_from_json({{"pairs", "p"}, {"exemplars", "e"}, {"models", {"mock"}}, {"setups", {"bogus"}}},
                                    dir.path()));
  }

  TEST_CASE("missing artifacts name the rebuild command") {
    TempDir dir;
    auto m = manifest_from_json({{"pairs", "nope.jsonl"}, {"exemplars", "e.jsonl"}, {"models", {"mock"}}}, dir.path());
    try {
      run_matrix(m);
      FAIL("expected Error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("commentgen mine") != std::string::npos);
    }
  }

  TEST_CASE("every cell is a report or a recorded failure") {
    TempDir dir;
    auto m = small_manifest(dir, 3);
    auto refuse = [](const ChatRequest& r) {
      return r.kind == RequestKind::Annotate && r.bundle && r.bundle->target.name.find("_find") != std::string::npos;
    };
    LlmClient client({{"mock", std::make_shared<MockProvider>(refuse)}}, {});
    auto run = run_matrix(m, client);
    std::size_t commented = 0;
    for (const auto& u : import_dataset(dir / "pairs.jsonl")) commented += u.leading_comment.has_value();
    CHECK(run.reports.size() + run.failures.size() == commented * 2);
    CHECK(run.failures.size() == 3 * 2);
    for (const auto& f : run.failures) CHECK(f.stage == "extract");
    CHECK(run.counts.at("cells") == commented * 2);

    auto out = write_run(run);
    auto back = load_run(out);
    CHECK(back.run_id == run.run_id);
    CHECK(back.reports.size() == run.reports.size());
    CHECK(back.failures.size() == run.failures.size());
    CHECK(metric_csv(back.reports) == metric_csv(run.reports));
    write_report(back, dir / "rep");
    for (auto f : {"similarity.csv", "completeness.csv", "completeness.svg", "categories.csv", "reports.csv",
                   "failures.csv", "tables.txt"})
      CHECK(std::filesystem::exists(dir / "rep" / f));
    CHECK(read_file(dir / "rep" / "failures.csv").find("extract") != std::string::npos);
  }

  TEST_CASE("mock runs are bit-reproducible") {
    TempDir dir;
    auto m = small_manifest(dir, 2);
    LlmClient c1({{"mock", std::make_shared<MockProvider>()}}, {});
    LlmClient c2({{"mock", std::make_shared<MockProvider>()}}, {});
    auto a = run_matrix(m, c1), b = run_matrix(m, c2);
    CHECK(a.run_id == b.run_id);
    CHECK(metric_csv(a.reports) == metric_csv(b.reports));
  }

  TEST_CASE("csv parsing handles quotes") {
    auto rows = parse_csv("a,\"b,c\",\"d\"\"e\"\n1,2,3\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][1] == "b,c");
    CHECK(rows[0][2] == "d\"e");
  }
}
