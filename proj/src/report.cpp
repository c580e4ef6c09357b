#include "commentgen/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ctime>
#include <random>
#include <set>
#include <thread>

#include "commentgen/digest.hpp"
#include "commentgen/docstore.hpp"
#include "commentgen/stats.hpp"
#include "commentgen/text.hpp"

namespace commentgen {
namespace fs = std::filesystem;
using nlohmann::json;

fs::path resolve(const Manifest& m, const fs::path& p) {
  if (p.empty() || p.is_absolute()) return p;
  return m.base_dir / p;
}

Manifest manifest_from_json(const json& j, const fs::path& base_dir) {
  Manifest m;
  m.base_dir = base_dir;
  m.raw = j;
  try {
    m.name = j.value("name", m.name);
    m.pairs = j.at("pairs").get<std::string>();
    if (j.contains("index")) m.index = j.at("index").get<std::string>();
    if (j.contains("ast_dir")) m.ast_dir = j.at("ast_dir").get<std::string>();
    m.exemplars = j.at("exemplars").get<std::string>();
    if (j.contains("models_registry")) m.models_registry = j.at("models_registry").get<std::string>();
    m.models = j.at("models").get<std::vector<std::string>>();
    for (const auto& s : j.value("setups", std::vector<std::string>{"code", "code+ast", "code+doc", "code+ast+doc"}))
      m.setups.push_back(setup_from_string(s));
    m.budget = j.value("budget", m.budget);
    m.seed = j.value("seed", m.seed);
    m.k = j.value("k", m.k);
    if (j.contains("doc_type")) m.doc_type = doc_type_from_string(j.at("doc_type").get<std::string>());
    if (j.contains("params")) {
      m.params.temperature = j.at("params").value("temperature", m.params.temperature);
      m.params.max_output_tokens = j.at("params").value("max_output_tokens", m.params.max_output_tokens);
    }
    m.out_dir = j.value("out_dir", m.out_dir.string());
    if (j.contains("cache_dir")) m.cache_dir = j.at("cache_dir").get<std::string>();
    m.embedder = j.value("embedder", std::string{});
    m.judge = j.value("judge", std::string{});
    m.concurrency = j.value("concurrency", m.concurrency);
    m.max_units = j.value("max_units", m.max_units);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  if (m.models.empty()) throw ConfigError("manifest lists no models");
  if (m.setups.empty()) throw ConfigError("manifest lists no setups");
  if (m.k == 0) throw ConfigError("manifest k must be at least 1");
  return m;
}

Manifest load_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return manifest_from_json(j, path.parent_path());
}

std::string run_id_for(const Manifest& m) { return m.name + "-" + sha256_hex(m.raw.dump()).substr(0, 12); }

namespace {

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void require(const fs::path& p, const std::string& what, const std::string& rebuild) {
  std::error_code ec;
  if (!fs::exists(p, ec))
    throw Error(what + " not found: " + p.string() + "\n  rebuild with: " + rebuild);
}

std::map<std::string, CondensedAst> load_ast_dir(const fs::path& dir) {
  std::map<std::string, CondensedAst> out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    json j;
    try {
      j = json::parse(read_file(f));
    } catch (const json::exception& e) {
      throw ParseError(f.string() + ": " + e.what(), 0);
    }
    auto add = [&](const json& item) {
      CondensedAst ast = condensed_from_json(item);
      out[ast.unit_id] = std::move(ast);
    };
    if (j.contains("units")) {
      for (const auto& item : j.at("units")) add(item);
    } else {
      add(j);
    }
  }
  return out;
}

std::unique_ptr<Embedder> make_embedder(const std::string& spec) {
  if (spec.empty()) return nullptr;
  if (spec == "hashed") return std::make_unique<HashedTokenEmbedder>();
  if (spec.rfind("service:", 0) == 0) {
    std::string rest = spec.substr(8);
    auto a = rest.find('|');
    auto b = rest.find('|', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
      throw ConfigError("embedder service spec must be service:<endpoint>|<model>|<auth_env>");
    return std::make_unique<ServiceEmbedder>(rest.substr(0, a), rest.substr(a + 1, b - a - 1), rest.substr(b + 1));
  }
  throw ConfigError("unknown embedder '" + spec + "' (expected hashed or service:<endpoint>|<model>|<auth_env>)");
}

struct CellOutcome {
  std::optional<MetricReport> report;
  std::optional<GeneratedComment> generated;
  std::optional<CellFailure> failure;
};

}  // namespace

ExperimentRun run_matrix(const Manifest& manifest) {
  ClientOptions opts;
  opts.cache_dir = manifest.cache_dir ? resolve(manifest, *manifest.cache_dir) : resolve(manifest, manifest.out_dir) / "cache";
  opts.max_in_flight = manifest.concurrency;
  LlmClient client = LlmClient::with_defaults(opts);
  return run_matrix(manifest, client);
}

ExperimentRun run_matrix(const Manifest& manifest, LlmClient& client) {
  ExperimentRun run;
  run.manifest = manifest;
  run.run_id = run_id_for(manifest);
  run.started = utc_now();

  const fs::path pairs_path = resolve(manifest, manifest.pairs);
  require(pairs_path, "pairs file", "commentgen mine --root <repo> --out " + pairs_path.string());
  const fs::path exemplar_path = resolve(manifest, manifest.exemplars);
  require(exemplar_path, "exemplar pool", "restore data/exemplars.jsonl or point \"exemplars\" at a 30-example pool");

  bool any_docs = std::any_of(manifest.setups.begin(), manifest.setups.end(), uses_docs);
  bool any_ast = std::any_of(manifest.setups.begin(), manifest.setups.end(), uses_ast);
  std::optional<OkapiRetriever> retriever;
  if (any_docs) {
    if (!manifest.index) throw Error("design-doc setups need \"index\" in the manifest\n  rebuild with: commentgen index --docs <dir> --out index.bin");
    fs::path p = resolve(manifest, *manifest.index);
    require(p, "document index", "commentgen index --docs <dir> --out " + p.string());
    retriever.emplace(load_index(p), manifest.doc_type);
  }
  std::map<std::string, CondensedAst> asts;
  if (any_ast) {
    if (!manifest.ast_dir)
      throw Error("AST setups need \"ast_dir\" in the manifest\n  rebuild with: commentgen ast --pairs " +
                  pairs_path.string() + " --root <repo> --out-dir <dir>");
    fs::path p = resolve(manifest, *manifest.ast_dir);
    require(p, "AST directory", "commentgen ast --pairs " + pairs_path.string() + " --root <repo> --out-dir " + p.string());
    asts = load_ast_dir(p);
  }

  ModelRegistry registry = manifest.models_registry ? ModelRegistry::load(resolve(manifest, *manifest.models_registry))
                                                    : ModelRegistry::builtin_mock();
  std::vector<const ModelSpec*> models;
  for (const auto& name : manifest.models) {
    models.push_back(&registry.get(name));
    run.display_names[name] = models.back()->display_name;
  }
  const ModelSpec* judge = manifest.judge.empty() ? nullptr : &registry.get(manifest.judge);
  std::unique_ptr<Embedder> embedder = make_embedder(manifest.embedder);

  std::vector<Exemplar> exemplars = load_exemplar_pool(exemplar_path).exemplars();
  if (manifest.seed != 0) std::shuffle(exemplars.begin(), exemplars.end(), std::mt19937_64(manifest.seed));
  const ExemplarPool pool(std::move(exemplars), manifest.seed);

  std::vector<CodeUnit> units;
  for (auto& u : import_dataset(pairs_path))
    if (u.leading_comment && !trim(u.leading_comment->text).empty()) units.push_back(std::move(u));
  if (manifest.max_units && units.size() > manifest.max_units) units.resize(manifest.max_units);
  for (const auto& u : units) {
    CategoryLabel l;
    l.unit_id = u.id;
    l.source = CommentSource::Original;
    l.group = "original";
    l.categories = classify_rules(u.leading_comment->text, u.code);
    run.original_labels.push_back(std::move(l));
  }

  // retrieval depends only on the unit
  std::vector<std::vector<ScoredChunk>> unit_chunks(units.size());
  if (retriever) {
    for (std::size_t i = 0; i < units.size(); ++i)
      for (const auto& h : retriever->retrieve(build_unit_query(units[i]), manifest.k))
        unit_chunks[i].push_back({retriever->index().chunks[h.chunk], h.score});
  }

  struct Cell {
    std::size_t model, setup, unit;
  };
  std::vector<Cell> cells;
  for (std::size_t m = 0; m < models.size(); ++m)
    for (std::size_t s = 0; s < manifest.setups.size(); ++s)
      for (std::size_t u = 0; u < units.size(); ++u) cells.push_back({m, s, u});

  EvalOptions eval_opts{embedder.get(), judge ? &client : nullptr, judge};
  std::vector<CellOutcome> outcomes(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      const ModelSpec& model = *models[c.model];
      const Setup setup = manifest.setups[c.setup];
      const CodeUnit& unit = units[c.unit];
      CellOutcome& out = outcomes[i];
      std::string stage = "prompt";
      try {
        PromptResources res;
        if (uses_ast(setup)) {
          auto it = asts.find(unit.id);
          if (it != asts.end()) res.ast = it->second;
        }
        if (uses_docs(setup)) res.chunks = unit_chunks[c.unit];
        std::size_t window = model.context_window > manifest.params.max_output_tokens
                                 ? model.context_window - manifest.params.max_output_tokens
                                 : 0;
        PromptBundle bundle = build_prompt(unit, pool, ContextConfig::from(setup), std::move(res),
                                           std::min(manifest.budget, window));
        stage = "complete";
        GeneratedComment g = client.complete(bundle, model, manifest.params);
        stage = "evaluate";
        out.report = evaluate(g, unit, eval_opts);
        out.generated = std::move(g);
      } catch (const ExtractionError& e) {
        out.failure = CellFailure{unit.id, model.name, setup, "extract", e.what()};
      } catch (const std::exception& e) {
        out.failure = CellFailure{unit.id, model.name, setup, stage, e.what()};
      }
    }
  };
  std::size_t n_threads = std::clamp<std::size_t>(manifest.concurrency, 1, std::max<std::size_t>(1, cells.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  std::size_t hits = 0;
  for (auto& o : outcomes) {
    if (o.report) run.reports.push_back(std::move(*o.report));
    if (o.generated) {
      hits += o.generated->cached;
      run.generated.push_back(std::move(*o.generated));
    }
    if (o.failure) run.failures.push_back(std::move(*o.failure));
  }
  run.counts = {{"units", units.size()},          {"cells", cells.size()},
                {"reports", run.reports.size()},  {"failures", run.failures.size()},
                {"cache_hits", hits},             {"models", models.size()},
                {"setups", manifest.setups.size()}};
  run.finished = utc_now();
  return run;
}

namespace {

json score_json(const Score& s) {
  json j = {{"value", s.value ? json(*s.value) : json(nullptr)}};
  if (!s.diagnostic.empty()) j["diagnostic"] = s.diagnostic;
  if (!s.raw.empty()) j["raw"] = s.raw;
  return j;
}

Score score_from_json(const json& j) {
  Score s;
  if (j.contains("value") && !j.at("value").is_null()) s.value = j.at("value").get<double>();
  s.diagnostic = j.value("diagnostic", std::string{});
  s.raw = j.value("raw", std::string{});
  return s;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json failure_json(const CellFailure& f) {
  return {{"unit_id", f.unit_id}, {"model", f.model}, {"setup", to_string(f.setup)}, {"stage", f.stage},
          {"message", f.message}};
}

json label_json(const CategoryLabel& l) {
  json cats = json::array();
  for (Category c : l.categories) cats.push_back(to_string(c));
  return {{"unit_id", l.unit_id}, {"source", to_string(l.source)}, {"method", to_string(l.method)},
          {"group", l.group}, {"categories", cats}};
}

}  // namespace

json to_json(const MetricReport& r) {
  json cats = json::array();
  for (Category c : r.categories) cats.push_back(to_string(c));
  return {{"unit_id", r.unit_id},
          {"model", r.model},
          {"setup", to_string(r.setup)},
          {"rouge_l", opt_json(r.rouge_l)},
          {"bleu_4", opt_json(r.bleu_4)},
          {"embed_sim", score_json(r.embed_sim)},
          {"judge", score_json(r.judge)},
          {"completeness", opt_json(r.completeness)},
          {"categories", cats},
          {"original_size", r.original_size},
          {"empty_comment", r.empty_comment}};
}

MetricReport metric_report_from_json(const json& j) {
  MetricReport r;
  try {
    r.unit_id = j.at("unit_id").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.setup = setup_from_string(j.at("setup").get<std::string>());
    r.rouge_l = opt_from(j, "rouge_l");
    r.bleu_4 = opt_from(j, "bleu_4");
    if (j.contains("embed_sim")) r.embed_sim = score_from_json(j.at("embed_sim"));
    if (j.contains("judge")) r.judge = score_from_json(j.at("judge"));
    r.completeness = opt_from(j, "completeness");
    for (const auto& c : j.value("categories", json::array())) r.categories.push_back(category_from_string(c.get<std::string>()));
    r.original_size = j.value("original_size", std::size_t{0});
    r.empty_comment = j.value("empty_comment", false);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed metric report: ") + e.what(), 0);
  }
  return r;
}

std::string failures_csv(const std::vector<CellFailure>& failures) {
  std::string out = "unit_id,model,setup,stage,message\n";
  for (const auto& f : failures)
    out += csv_escape(f.unit_id) + "," + csv_escape(f.model) + "," + std::string(to_string(f.setup)) + "," + f.stage +
           "," + csv_escape(f.message) + "\n";
  return out;
}

fs::path write_run(const ExperimentRun& run) {
  fs::path dir = resolve(run.manifest, run.manifest.out_dir) / run.run_id;
  json failures = json::array();
  for (const auto& f : run.failures) failures.push_back(failure_json(f));
  json labels = json::array();
  for (const auto& l : run.original_labels) labels.push_back(label_json(l));
  json record = {{"run_id", run.run_id},
                 {"manifest", run.manifest.raw},
                 {"base_dir", fs::absolute(run.manifest.base_dir).string()},
                 {"started", run.started},
                 {"finished", run.finished},
                 {"counts", run.counts},
                 {"display_names", run.display_names},
                 {"failures", failures},
                 {"original_labels", labels}};
  write_file(dir / "run.json", record.dump(2));
  std::string buf;
  for (const auto& r : run.reports) buf += to_json(r).dump() + "\n";
  write_file(dir / "reports.jsonl", buf);
  save_generated(run.generated, dir / "generated.jsonl");
  write_file(dir / "failures.csv", failures_csv(run.failures));
  return dir;
}

ExperimentRun load_run(const fs::path& dir) {
  require(dir / "run.json", "run record", "commentgen run --manifest <run.json>");
  json record;
  try {
    record = json::parse(read_file(dir / "run.json"));
  } catch (const json::exception& e) {
    throw ParseError((dir / "run.json").string() + ": " + e.what(), 0);
  }
  ExperimentRun run;
  run.manifest = manifest_from_json(record.at("manifest"), record.value("base_dir", std::string{}));
  run.run_id = record.at("run_id").get<std::string>();
  run.started = record.value("started", std::string{});
  run.finished = record.value("finished", std::string{});
  run.counts = record.value("counts", std::map<std::string, std::size_t>{});
  run.display_names = record.value("display_names", std::map<std::string, std::string>{});
  for (const auto& f : record.value("failures", json::array()))
    run.failures.push_back({f.at("unit_id").get<std::string>(), f.at("model").get<std::string>(),
                            setup_from_string(f.at("setup").get<std::string>()), f.at("stage").get<std::string>(),
                            f.at("message").get<std::string>()});
  for (const auto& l : record.value("original_labels", json::array())) {
    CategoryLabel label;
    label.unit_id = l.at("unit_id").get<std::string>();
    label.source = CommentSource::Original;
    label.method = classify_method_from_string(l.value("method", std::string("rules")));
    label.group = l.value("group", std::string("original"));
    for (const auto& c : l.at("categories")) label.categories.push_back(category_from_string(c.get<std::string>()));
    run.original_labels.push_back(std::move(label));
  }
  std::string data = read_file(dir / "reports.jsonl");
  for (std::string_view line : split_lines(data))
    if (!trim(line).empty()) run.reports.push_back(metric_report_from_json(json::parse(line)));
  if (fs::exists(dir / "generated.jsonl")) run.generated = load_generated(dir / "generated.jsonl");
  return run;
}

std::string_view to_string(SimilarityMetric m) {
  switch (m) {
    case SimilarityMetric::RougeL: return "ROUGE-L";
    case SimilarityMetric::Bleu4: return "BLEU-4";
    case SimilarityMetric::Embed: return "Embed";
    case SimilarityMetric::Judge: return "Judge";
  }
  return "ROUGE-L";
}

namespace {

std::vector<std::string> ordered_models(std::set<std::string> present, const std::vector<std::string>& order) {
  std::vector<std::string> out;
  for (const auto& m : order)
    if (present.erase(m)) out.push_back(m);
  out.insert(out.end(), present.begin(), present.end());
  return out;
}

std::size_t setup_index(Setup s) { return static_cast<std::size_t>(s); }

std::optional<double> metric_value(const MetricReport& r, SimilarityMetric m) {
  switch (m) {
    case SimilarityMetric::RougeL: return r.rouge_l;
    case SimilarityMetric::Bleu4: return r.bleu_4;
    case SimilarityMetric::Embed: return r.embed_sim.value;
    case SimilarityMetric::Judge: return r.judge.value;
  }
  return std::nullopt;
}

std::string display(const std::map<std::string, std::string>& names, const std::string& model) {
  auto it = names.find(model);
  return it == names.end() ? model : it->second;
}

}  // namespace

SimilarityTable table_similarity(const std::vector<MetricReport>& reports, const std::vector<std::string>& model_order,
                                 const std::map<std::string, std::string>& display_names) {
  if (reports.empty()) throw PreconditionError("similarity table needs at least one report");
  std::set<std::string> present;
  for (const auto& r : reports) present.insert(r.model);
  SimilarityTable table;
  for (const auto& model : ordered_models(present, model_order)) {
    SimilarityRow row;
    row.model = display(display_names, model);
    for (Setup s : kAllSetups) {
      for (std::size_t mi = 0; mi < kSimilarityMetrics.size(); ++mi) {
        std::vector<double> values;
        for (const auto& r : reports)
          if (r.model == model && r.setup == s)
            if (auto v = metric_value(r, kSimilarityMetrics[mi])) values.push_back(*v);
        if (values.empty()) continue;
        // sorted so the mean does not depend on report order
        std::sort(values.begin(), values.end());
        row.cells[setup_index(s)][mi] = CellStats{values.size(), mean(values), median(values)};
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string render_similarity_row(const SimilarityRow& row) {
  std::string out = row.model;
  for (std::size_t s = 0; s < 4; ++s) {
    out += " |";
    for (std::size_t m = 0; m < 4; ++m) {
      out += ' ';
      const auto& c = row.cells[s][m];
      out += c ? format_fixed(c->mean, 2) : std::string(kEmptyCell);
    }
  }
  return out;
}

std::string render_similarity_table(const SimilarityTable& table) {
  std::string out = "Context";
  for (Setup s : kAllSetups) out += " | " + std::string(display_name(s));
  out += "\nModel";
  for (std::size_t s = 0; s < 4; ++s) {
    out += " |";
    for (auto m : kSimilarityMetrics) out += " " + std::string(to_string(m));
  }
  out += '\n';
  for (const auto& row : table.rows) out += render_similarity_row(row) + "\n";
  return out;
}

std::string similarity_csv(const SimilarityTable& table) {
  std::string out = "model,setup,metric,n,mean,median\n";
  for (const auto& row : table.rows)
    for (Setup s : kAllSetups)
      for (std::size_t m = 0; m < 4; ++m) {
        const auto& c = row.cells[setup_index(s)][m];
        out += csv_escape(row.model) + "," + std::string(to_string(s)) + "," + std::string(to_string(kSimilarityMetrics[m])) + ",";
        out += c ? std::to_string(c->n) + "," + format_fixed(c->mean, 6) + "," + format_fixed(c->median, 6) : "0,,";
        out += "\n";
      }
  return out;
}

std::vector<CurvePoint> completeness_curve(const std::vector<MetricReport>& reports) {
  std::map<std::pair<std::string, unsigned>, std::vector<double>> buckets;
  for (const auto& r : reports) {
    if (!r.completeness || r.original_size == 0) continue;
    unsigned b = 0;
    while ((std::size_t{2} << b) <= r.original_size) ++b;
    buckets[{r.model, b}].push_back(*r.completeness);
  }
  std::vector<CurvePoint> out;
  for (auto& [key, values] : buckets) {
    std::sort(values.begin(), values.end());
    out.push_back({key.first, std::size_t{1} << key.second, std::size_t{2} << key.second, values.size(), mean(values)});
  }
  return out;
}

std::string completeness_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "model,bucket_low,bucket_high,n,mean_completeness\n";
  for (const auto& p : curve)
    out += csv_escape(p.model) + "," + std::to_string(p.bucket_low) + "," + std::to_string(p.bucket_high) + "," +
           std::to_string(p.n) + "," + format_fixed(p.mean_completeness, 6) + "\n";
  return out;
}

std::string completeness_svg(const std::vector<CurvePoint>& curve) {
  constexpr double W = 640, H = 360, L = 60, R = 20, T = 20, B = 50;
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
  double xmin = 1e300, xmax = -1e300, ymax = 1.0;
  for (const auto& p : curve) {
    double x = std::log2(static_cast<double>(p.bucket_low));
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymax = std::max(ymax, p.mean_completeness);
  }
  if (curve.empty()) xmin = 0, xmax = 1;
  if (xmax <= xmin) xmax = xmin + 1;
  ymax *= 1.1;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - y / ymax * (H - T - B); };
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"640\" height=\"360\" fill=\"white\"/>\n";
  svg += "<line x1=\"" + format_fixed(L, 1) + "\" y1=\"" + format_fixed(H - B, 1) + "\" x2=\"" + format_fixed(W - R, 1) +
         "\" y2=\"" + format_fixed(H - B, 1) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_fixed(L, 1) + "\" y1=\"" + format_fixed(T, 1) + "\" x2=\"" + format_fixed(L, 1) + "\" y2=\"" +
         format_fixed(H - B, 1) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"320\" y=\"350\" text-anchor=\"middle\">original size (bytes, log2 buckets)</text>\n";
  svg += "<text x=\"15\" y=\"180\" transform=\"rotate(-90 15 180)\" text-anchor=\"middle\">mean completeness</text>\n";
  for (double y : {0.0, 0.5, 1.0}) {
    svg += "<text x=\"" + format_fixed(L - 5, 1) + "\" y=\"" + format_fixed(py(y) + 4, 1) + "\" text-anchor=\"end\">" +
           format_fixed(y, 1) + "</text>\n";
  }
  std::map<std::string, std::vector<const CurvePoint*>> series;
  std::vector<std::string> order;
  for (const auto& p : curve) {
    if (!series.count(p.model)) order.push_back(p.model);
    series[p.model].push_back(&p);
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    const char* color = palette[i % 6];
    std::string pts;
    for (const auto* p : series[order[i]]) {
      double x = px(std::log2(static_cast<double>(p->bucket_low)));
      double y = py(p->mean_completeness);
      pts += format_fixed(x, 1) + "," + format_fixed(y, 1) + " ";
      svg += "<circle cx=\"" + format_fixed(x, 1) + "\" cy=\"" + format_fixed(y, 1) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" points=\"" + std::string(trim(pts)) + "\"/>\n";
    svg += "<text x=\"" + format_fixed(W - R - 150, 1) + "\" y=\"" + format_fixed(T + 14 * (i + 1), 1) + "\" fill=\"" +
           color + "\">" + order[i] + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field", text.size());
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::map<std::string, std::size_t> header_index(const std::vector<std::string>& header,
                                                const std::vector<std::string>& required) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < header.size(); ++i) idx[to_lower(trim(header[i]))] = i;
  for (const auto& col : required) {
    if (!idx.count(col)) {
      std::string found;
      for (const auto& h : header) found += (found.empty() ? "" : ", ") + std::string(trim(h));
      throw ConfigError("times CSV lacks column '" + col + "' (found: " + found + ")");
    }
  }
  return idx;
}

enum class Baseline { None, Original, NoComments };

Baseline baseline_of(std::string_view model) {
  std::string m = to_lower(trim(model));
  m.erase(std::remove_if(m.begin(), m.end(), [](char c) { return c == ' ' || c == '-' || c == '_'; }), m.end());
  if (m == "original") return Baseline::Original;
  if (m == "nocomments" || m == "nocomment") return Baseline::NoComments;
  return Baseline::None;
}

double parse_number(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (trim(std::string_view(s).substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(std::string("bad ") + what + " value '" + s + "'");
}

bool parse_flag(std::string s) {
  s = to_lower(trim(s));
  return s == "1" || s == "true" || s == "yes" || s == "*";
}

void fill_reductions(TimeTable& t) {
  for (auto& row : t.rows)
    for (auto& c : row.cells) {
      if (!c.mean) continue;
      if (t.original && *t.original > 0) c.reduction_vs_original = (*t.original - *c.mean) / *t.original;
      if (t.no_comments && *t.no_comments > 0) c.reduction_vs_no_comments = (*t.no_comments - *c.mean) / *t.no_comments;
    }
}

}  // namespace

std::vector<TimeRecord> parse_times_csv(std::string_view text) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw ConfigError("times CSV is empty");
  auto idx = header_index(rows.front(), {"participant", "model", "setup", "task", "minutes"});
  std::vector<TimeRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto get = [&](const char* col) {
      std::size_t i = idx.at(col);
      return i < row.size() ? std::string(trim(row[i])) : std::string{};
    };
    TimeRecord rec{get("participant"), get("model"), get("setup"), get("task"), parse_number(get("minutes"), "minutes")};
    if (baseline_of(rec.model) == Baseline::None) setup_from_string(rec.setup);  // validates
    out.push_back(std::move(rec));
  }
  return out;
}

std::string_view to_string(Binning b) { return b == Binning::NoCommentMedian ? "nocomment-median" : "pooled-median"; }

Binning binning_from_string(std::string_view s) {
  if (s == "nocomment-median") return Binning::NoCommentMedian;
  if (s == "pooled-median") return Binning::PooledMedian;
  throw ConfigError("unknown binning '" + std::string(s) + "' (expected nocomment-median or pooled-median)");
}

std::vector<TimeTable> time_analysis(const std::vector<TimeRecord>& records, Binning binning,
                                     const std::vector<std::string>& model_order) {
  std::vector<std::string> tasks;
  for (const auto& r : records)
    if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end()) tasks.push_back(r.task);
  std::vector<TimeTable> tables;
  for (const auto& task : tasks) {
    TimeTable t;
    t.task = task;
    std::vector<double> original, no_comments;
    std::map<std::string, std::array<std::vector<double>, 4>> samples;
    std::set<std::string> present;
    for (const auto& r : records) {
      if (r.task != task) continue;
      switch (baseline_of(r.model)) {
        case Baseline::Original: original.push_back(r.minutes); break;
        case Baseline::NoComments: no_comments.push_back(r.minutes); break;
        case Baseline::None:
          samples[r.model][setup_index(setup_from_string(r.setup))].push_back(r.minutes);
          present.insert(r.model);
          break;
      }
    }
    if (!original.empty()) t.original = mean(original);
    if (!no_comments.empty()) t.no_comments = mean(no_comments);
    std::optional<double> threshold;
    if (binning == Binning::NoCommentMedian) {
      if (no_comments.empty())
        t.warnings.push_back(task + ": no No Comments times; binning by the pooled median of each comparison");
      else
        threshold = median(no_comments);
    }
    for (const auto& model : ordered_models(present, model_order)) {
      TimeRow row;
      row.model = model;
      auto& s = samples[model];
      for (std::size_t i = 0; i < 4; ++i) {
        row.cells[i].n = s[i].size();
        if (!s[i].empty()) row.cells[i].mean = mean(s[i]);
      }
      const std::size_t doc = setup_index(Setup::CodeDoc);
      bool significant = !s[doc].empty();
      bool compared = false;
      for (std::size_t other = 0; other < 4 && significant; ++other) {
        if (other == doc || s[other].empty()) continue;
        compared = true;
        double cut = threshold ? *threshold : [&] {
          std::vector<double> pooled = s[doc];
          pooled.insert(pooled.end(), s[other].begin(), s[other].end());
          return median(pooled);
        }();
        auto count = [&](const std::vector<double>& xs) {
          double fast = 0;
          for (double x : xs) fast += x < cut;
          return std::vector<double>{fast, static_cast<double>(xs.size()) - fast};
        };
        try {
          auto res = chi_square_two_tailed({count(s[doc]), count(s[other])});
          if (!(res.p_value < 0.05)) significant = false;
        } catch (const PreconditionError& e) {
          t.warnings.push_back(task + ": " + model + " " + std::string(to_string(kAllSetups[other])) +
                               ": no test (" + e.what() + ")");
          significant = false;
        }
      }
      row.cells[doc].starred = significant && compared;
      t.rows.push_back(std::move(row));
    }
    fill_reductions(t);
    tables.push_back(std::move(t));
  }
  return tables;
}

TimeTable time_table_from_means(std::string_view csv_text, std::string task, const std::vector<std::string>& model_order) {
  auto rows = parse_csv(csv_text);
  if (rows.empty()) throw ConfigError("means CSV is empty");
  auto idx = header_index(rows.front(), {"model", "setup", "mean"});
  TimeTable t;
  t.task = std::move(task);
  std::map<std::string, TimeRow> by_model;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto get = [&](const char* col) -> std::string {
      auto it = idx.find(col);
      if (it == idx.end() || it->second >= row.size()) return {};
      return std::string(trim(row[it->second]));
    };
    std::string mean_text = get("mean");
    bool star = !mean_text.empty() && mean_text.back() == '*';
    if (star) mean_text.pop_back();
    double value = parse_number(mean_text, "mean");
    star = star || parse_flag(get("starred"));
    std::string model = get("model");
    switch (baseline_of(model)) {
      case Baseline::Original: t.original = value; continue;
      case Baseline::NoComments: t.no_comments = value; continue;
      case Baseline::None: break;
    }
    TimeRow& tr = by_model[model];
    tr.model = model;
    TimeCell& cell = tr.cells[setup_index(setup_from_string(get("setup")))];
    cell.mean = value;
    cell.starred = star;
    cell.n = 1;
  }
  std::set<std::string> present;
  for (const auto& [m, _] : by_model) present.insert(m);
  for (const auto& m : ordered_models(present, model_order)) t.rows.push_back(by_model[m]);
  fill_reductions(t);
  return t;
}

std::string render_time_cell(const TimeCell& cell) {
  if (!cell.mean) return std::string(kEmptyCell);
  return format_trimmed(*cell.mean, 2) + (cell.starred ? "*" : "");
}

std::string render_time_row(const TimeRow& row, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < 4; ++i) {
    if (i) out += separator;
    out += render_time_cell(row.cells[i]);
  }
  return out;
}

std::string render_time_table(const TimeTable& t) {
  std::string out;
  if (!t.task.empty()) out += "Task: " + t.task + "\n";
  out += "Model";
  for (Setup s : kAllSetups) out += " | " + std::string(display_name(s));
  out += '\n';
  for (const auto& row : t.rows) out += row.model + " | " + render_time_row(row) + "\n";
  if (t.original) out += "Original | " + format_trimmed(*t.original, 2) + "\n";
  if (t.no_comments) out += "No Comments | " + format_trimmed(*t.no_comments, 2) + "\n";
  return out;
}

std::string times_csv(const std::vector<TimeTable>& tables) {
  auto opt = [](const std::optional<double>& v, int digits) { return v ? format_fixed(*v, digits) : std::string{}; };
  std::string out = "task,model,setup,n,mean,starred,reduction_vs_original,reduction_vs_no_comments\n";
  for (const auto& t : tables) {
    for (const auto& row : t.rows)
      for (std::size_t i = 0; i < 4; ++i) {
        const auto& c = row.cells[i];
        if (!c.mean) continue;
        out += csv_escape(t.task) + "," + csv_escape(row.model) + "," + std::string(to_string(kAllSetups[i])) + "," +
               std::to_string(c.n) + "," + opt(c.mean, 4) + "," + (c.starred ? "1" : "0") + "," +
               opt(c.reduction_vs_original, 4) + "," + opt(c.reduction_vs_no_comments, 4) + "\n";
      }
    if (t.original) out += csv_escape(t.task) + ",Original,,," + format_fixed(*t.original, 4) + ",0,,\n";
    if (t.no_comments) out += csv_escape(t.task) + ",No Comments,,," + format_fixed(*t.no_comments, 4) + ",0,,\n";
  }
  return out;
}

void write_report(const ExperimentRun& run, const fs::path& out_dir, const std::vector<TimeTable>* times) {
  std::string tables;
  if (!run.reports.empty()) {
    SimilarityTable sim = table_similarity(run.reports, run.manifest.models, run.display_names);
    write_file(out_dir / "similarity.csv", similarity_csv(sim));
    tables += "Similarity of reference and generated comments (means)\n" + render_similarity_table(sim) + "\n";
  } else {
    write_file(out_dir / "similarity.csv", "model,setup,metric,n,mean,median\n");
    tables += "No reports.\n\n";
  }
  auto curve = completeness_curve(run.reports);
  write_file(out_dir / "completeness.csv", completeness_csv(curve));
  write_file(out_dir / "completeness.svg", completeness_svg(curve));

  std::vector<CategoryLabel> labels = run.original_labels;
  for (const auto& r : run.reports) {
    if (r.empty_comment) continue;
    CategoryLabel l;
    l.unit_id = r.unit_id;
    l.group = display(run.display_names, r.model) + " / " + std::string(display_name(r.setup));
    l.categories = r.categories;
    labels.push_back(std::move(l));
  }
  std::string cats = "group,method,comments";
  for (Category c : kAllCategories) cats += "," + std::string(to_string(c));
  cats += "\n";
  if (!labels.empty()) {
    auto rows = category_distribution(labels);
    for (const auto& row : rows) {
      cats += csv_escape(row.group) + "," + std::string(to_string(row.method)) + "," + std::to_string(row.comments);
      for (double p : row.percent) cats += "," + format_fixed(p, 2);
      cats += "\n";
    }
    tables += "Comment categories (% of comments)\n" + render_distribution(rows) + "\n";
  }
  tables += "Reference shares of useful human comments\n" + render_reference_distribution() + "\n";
  write_file(out_dir / "categories.csv", cats);
  write_file(out_dir / "reports.csv", metric_csv(run.reports));
  write_file(out_dir / "failures.csv", failures_csv(run.failures));
  if (times) {
    write_file(out_dir / "times.csv", times_csv(*times));
    for (const auto& t : *times) tables += render_time_table(t) + "\n";
  }
  write_file(out_dir / "tables.txt", tables);
}

}  // namespace commentgen
