// Command-line front end: one subcommand per pipeline stage.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "commentgen/astx.hpp"
#include "commentgen/classify.hpp"
#include "commentgen/corpus.hpp"
#include "commentgen/digest.hpp"
#include "commentgen/docstore.hpp"
#include "commentgen/evalkit.hpp"
#include "commentgen/llmclient.hpp"
#include "commentgen/promptgen.hpp"
#include "commentgen/report.hpp"
#include "commentgen/stats.hpp"
#include "commentgen/text.hpp"

namespace fs = std::filesystem;
using namespace commentgen;
using nlohmann::json;

namespace {

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

std::vector<CodeUnit> mine_root(const fs::path& root, const ScanConfig& cfg, std::size_t& files) {
  ScanResult scan = scan_repo(root, cfg);
  for (const auto& w : scan.warnings) warn(w);
  files = scan.files.size();
  std::vector<CodeUnit> units;
  for (const auto& f : scan.files) {
    try {
      auto found = extract_pairs(f);
      units.insert(units.end(), found.begin(), found.end());
    } catch (const ParseError& e) {
      warn(f.path + ": skipped: " + e.what() + " (offset " + std::to_string(e.offset()) + ")");
    }
  }
  return units;
}

BuildFlags flags_for(const std::optional<fs::path>& makefile, const std::string& cflags, const std::string& cppflags) {
  if (!cflags.empty() || !cppflags.empty()) return override_flags(cflags, cppflags);
  if (!makefile) return override_flags("");
  BuildFlags flags = recover_flags(*makefile);
  for (const auto& w : flags.warnings) warn(w);
  return flags;
}

std::map<std::string, std::vector<CodeUnit>> by_file(const std::vector<CodeUnit>& units) {
  std::map<std::string, std::vector<CodeUnit>> out;
  for (const auto& u : units) out[u.path].push_back(u);
  return out;
}

std::unique_ptr<Embedder> embedder_from(const std::string& spec) {
  if (spec.empty() || spec == "none") return nullptr;
  if (spec == "hashed") return std::make_unique<HashedTokenEmbedder>();
  if (spec.rfind("service:", 0) == 0) {
    std::string rest = spec.substr(8);
    auto a = rest.find('|'), b = rest.rfind('|');
    if (a == std::string::npos || a == b) throw ConfigError("--embedder service:<endpoint>|<model>|<auth_env>");
    return std::make_unique<ServiceEmbedder>(rest.substr(0, a), rest.substr(a + 1, b - a - 1), rest.substr(b + 1));
  }
  throw ConfigError("unknown embedder '" + spec + "'");
}

ModelRegistry registry_from(const std::string& path) {
  return path.empty() ? ModelRegistry::builtin_mock() : ModelRegistry::load(path);
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> out;
  std::string data = read_file(path);
  for (std::string_view line : split_lines(data))
    if (!trim(line).empty()) out.push_back(json::parse(line));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate and evaluate explanatory comments for C/C++ code"};
  app.require_subcommand(1);

  // mine
  auto* mine = app.add_subcommand("mine", "Extract code-comment pairs from a repository");
  std::string mine_root_dir, mine_out, mine_repo_id;
  std::vector<std::string> mine_ignores;
  mine->add_option("--root", mine_root_dir, "Repository root")->required();
  mine->add_option("--out", mine_out, "Output JSONL")->required();
  mine->add_option("--ignore", mine_ignores, "Extra ignore glob (repeatable)");
  mine->add_option("--repo-id", mine_repo_id, "Repository id (default: root directory name)");

  // ast
  auto* ast = app.add_subcommand("ast", "Dump and condense ASTs for one file or a whole pairs file");
  std::string ast_file, ast_makefile, ast_tool = std::string(kDefaultAstTool), ast_out, ast_pairs, ast_root,
                                      ast_out_dir, ast_cache, ast_cflags, ast_cppflags;
  std::size_t ast_budget = 1024;
  ast->add_option("--file", ast_file, "Source file");
  ast->add_option("--pairs", ast_pairs, "Pairs JSONL (batch mode, with --root and --out-dir)");
  ast->add_option("--root", ast_root, "Repository root the pairs were mined from");
  ast->add_option("--makefile", ast_makefile, "Makefile to recover CFLAGS/CPPFLAGS from");
  ast->add_option("--cflags", ast_cflags, "Override CFLAGS");
  ast->add_option("--cppflags", ast_cppflags, "Override CPPFLAGS");
  ast->add_option("--budget", ast_budget, "Token budget per unit");
  ast->add_option("--tool", ast_tool, "Frontend command template with {flags} and {file}");
  ast->add_option("--cache", ast_cache, "Raw dump cache directory");
  ast->add_option("--out", ast_out, "Output JSON (single file mode)");
  ast->add_option("--out-dir", ast_out_dir, "Output directory (batch mode)");

  // index
  auto* index = app.add_subcommand("index", "Classify, chunk and index design documents");
  std::string index_docs, index_out;
  std::size_t chunk_size = kDefaultChunkSize, chunk_overlap = kDefaultChunkOverlap;
  index->add_option("--docs", index_docs, "Documentation directory")->required();
  index->add_option("--out", index_out, "Index file")->required();
  index->add_option("--chunk-size", chunk_size, "Characters per chunk");
  index->add_option("--overlap", chunk_overlap, "Characters shared by consecutive chunks");

  // query
  auto* query = app.add_subcommand("query", "Retrieve chunks from an index");
  std::string query_index, query_text, query_doc_type;
  std::size_t query_k = 5;
  query->add_option("--index", query_index, "Index file")->required();
  query->add_option("--text", query_text, "Query text")->required();
  query->add_option("--k", query_k, "Number of chunks");
  query->add_option("--doc-type", query_doc_type, "Only chunks of this document type");

  // prompt
  auto* prompt = app.add_subcommand("prompt", "Build prompts for every commented unit");
  std::string prompt_pairs, prompt_index, prompt_ast, prompt_setup = "code", prompt_out, prompt_exemplars = "data/exemplars.jsonl",
                                                     prompt_doc_type;
  std::size_t prompt_budget = 8192, prompt_k = 5;
  bool prompt_all = false;
  prompt->add_option("--pairs", prompt_pairs, "Pairs JSONL")->required();
  prompt->add_option("--index", prompt_index, "Index file (doc setups)");
  prompt->add_option("--ast", prompt_ast, "Condensed AST directory (AST setups)");
  prompt->add_option("--setup", prompt_setup, "code | code+ast | code+doc | code+ast+doc");
  prompt->add_option("--budget", prompt_budget, "Prompt token budget");
  prompt->add_option("--k", prompt_k, "Doc chunks retrieved per unit");
  prompt->add_option("--doc-type", prompt_doc_type, "Restrict retrieval to one document type");
  prompt->add_option("--exemplars", prompt_exemplars, "Exemplar pool JSONL");
  prompt->add_flag("--all-units", prompt_all, "Include units without a reference comment");
  prompt->add_option("--out", prompt_out, "Output JSONL")->required();

  // complete
  auto* complete = app.add_subcommand("complete", "Send prompts to a model and extract comments");
  std::string complete_prompts, complete_model = "mock", complete_registry, complete_cache, complete_out;
  GenerationParams complete_params;
  complete->add_option("--prompts", complete_prompts, "Prompts JSONL")->required();
  complete->add_option("--model", complete_model, "Registry model name");
  complete->add_option("--registry", complete_registry, "models.json (default: mock only)");
  complete->add_option("--cache", complete_cache, "Response cache directory");
  complete->add_option("--temperature", complete_params.temperature, "Sampling temperature");
  complete->add_option("--max-tokens", complete_params.max_output_tokens, "Output token limit");
  complete->add_option("--out", complete_out, "Generated comments JSONL")->required();

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score generated comments against the references");
  std::string eval_pairs, eval_generated, eval_out, eval_embedder, eval_judge, eval_registry, eval_cache;
  evaluate_cmd->add_option("--pairs", eval_pairs, "Pairs JSONL")->required();
  evaluate_cmd->add_option("--generated", eval_generated, "Generated comments JSONL")->required();
  evaluate_cmd->add_option("--out", eval_out, "Report CSV")->required();
  evaluate_cmd->add_option("--embedder", eval_embedder, "hashed | service:<endpoint>|<model>|<auth_env>");
  evaluate_cmd->add_option("--judge", eval_judge, "Judge model name");
  evaluate_cmd->add_option("--registry", eval_registry, "models.json");
  evaluate_cmd->add_option("--cache", eval_cache, "Judge response cache directory");

  // stats
  auto* stats = app.add_subcommand("stats", "Chi-square analysis of task times or of a single table");
  std::string stats_times, stats_test = "chi2", stats_binning = "nocomment-median", stats_table, stats_out;
  stats->add_option("--times", stats_times, "Times CSV: participant, model, setup, task, minutes");
  stats->add_option("--test", stats_test, "Statistical test")->check(CLI::IsMember({"chi2"}));
  stats->add_option("--binning", stats_binning, "nocomment-median | pooled-median");
  stats->add_option("--table", stats_table, "Contingency table, rows split by ';' or '/', cells by ','");
  stats->add_option("--out", stats_out, "times.csv output");

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "Assign comment categories");
  std::string cls_generated, cls_pairs, cls_method = "rules", cls_out, cls_judge, cls_registry, cls_cache;
  classify_cmd->add_option("--generated", cls_generated, "Generated comments JSONL");
  classify_cmd->add_option("--pairs", cls_pairs, "Pairs JSONL (code, and the original comments without --generated)");
  classify_cmd->add_option("--method", cls_method, "rules | judge");
  classify_cmd->add_option("--judge", cls_judge, "Judge model for --method judge");
  classify_cmd->add_option("--registry", cls_registry, "models.json");
  classify_cmd->add_option("--cache", cls_cache, "Judge response cache directory");
  classify_cmd->add_option("--out", cls_out, "Labels CSV")->required();

  // run
  auto* run_cmd = app.add_subcommand("run", "Execute an experiment manifest");
  std::string run_manifest;
  run_cmd->add_option("--manifest", run_manifest, "Manifest JSON")->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "Render tables and plot data for a run");
  std::string report_run, report_out, report_runs_dir = "runs", report_times, report_binning = "nocomment-median";
  report_cmd->add_option("--run", report_run, "Run id or run directory")->required();
  report_cmd->add_option("--runs-dir", report_runs_dir, "Directory holding runs");
  report_cmd->add_option("--times", report_times, "Times CSV to analyse alongside");
  report_cmd->add_option("--binning", report_binning, "nocomment-median | pooled-median");
  report_cmd->add_option("--out", report_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mine) {
      ScanConfig cfg;
      cfg.repo_id = mine_repo_id;
      cfg.ignore_globs.insert(cfg.ignore_globs.end(), mine_ignores.begin(), mine_ignores.end());
      std::size_t files = 0;
      auto units = mine_root(mine_root_dir, cfg, files);
      std::size_t n = export_dataset(units, mine_out);
      std::size_t pairs = 0;
      for (const auto& u : units) pairs += u.leading_comment.has_value();
      std::cout << files << " files, " << n << " units, " << pairs << " with comments -> " << mine_out << "\n";
    } else if (*ast) {
      BuildFlags flags = flags_for(ast_makefile.empty() ? std::nullopt : std::optional<fs::path>(ast_makefile),
                                   ast_cflags, ast_cppflags);
      AstToolConfig tool;
      tool.tool_template = ast_tool;
      if (!ast_cache.empty()) tool.cache_dir = ast_cache;
      if (!ast_file.empty()) {
        if (ast_out.empty()) throw ConfigError("--file needs --out");
        fs::path root = ast_root.empty() ? fs::path(ast_file).parent_path() : fs::path(ast_root);
        if (root.empty()) root = ".";
        SourceFile sf;
        sf.repo_id = fs::absolute(root).lexically_normal().filename().string();
        if (sf.repo_id.empty()) sf.repo_id = fs::absolute(root).lexically_normal().parent_path().filename().string();
        sf.path = fs::relative(ast_file, root).generic_string();
        sf.language = language_for_path(ast_file).value_or(Language::C);
        sf.content = read_file(ast_file);
        sf.size_bytes = sf.content.size();
        tool.working_dir = ast_makefile.empty() ? fs::absolute(root) : fs::absolute(ast_makefile).parent_path();
        AstDocument doc = dump_ast(fs::absolute(ast_file), flags, tool);
        json units = json::array();
        for (const auto& u : extract_pairs(sf)) {
          try {
            units.push_back(to_json(condense(doc, u, ast_budget)));
          } catch (const Error& e) {
            warn(u.id + ": " + e.what());
          }
        }
        write_file(ast_out, json{{"file", sf.path}, {"units", units}}.dump(1));
        std::cout << units.size() << " condensed units -> " << ast_out << "\n";
      } else {
        if (ast_pairs.empty() || ast_root.empty() || ast_out_dir.empty())
          throw ConfigError("ast needs --file/--out or --pairs/--root/--out-dir");
        tool.working_dir = ast_makefile.empty() ? fs::absolute(ast_root) : fs::absolute(ast_makefile).parent_path();
        std::size_t written = 0;
        for (const auto& [path, units] : by_file(import_dataset(ast_pairs))) {
          try {
            AstDocument doc = dump_ast(fs::absolute(fs::path(ast_root) / path), flags, tool);
            json out = json::array();
            for (const auto& u : units) {
              try {
                out.push_back(to_json(condense(doc, u, ast_budget)));
              } catch (const Error& e) {
                warn(u.id + ": " + e.what());
              }
            }
            write_file(fs::path(ast_out_dir) / (sha256_hex(path).substr(0, 16) + ".json"),
                       json{{"file", path}, {"units", out}}.dump(1));
            written += out.size();
          } catch (const AstToolError& e) {
            warn(path + ": " + e.what() + "\n" + e.tool_stderr());
          } catch (const Error& e) {
            warn(path + ": " + e.what());
          }
        }
        std::cout << written << " condensed units -> " << ast_out_dir << "\n";
      }
    } else if (*index) {
      auto docs = load_design_docs(index_docs);
      if (docs.empty()) throw Error("no documents found under " + index_docs);
      std::vector<DocChunk> chunks;
      for (const auto& d : docs) {
        auto c = chunk_doc(d, chunk_size, chunk_overlap);
        chunks.insert(chunks.end(), c.begin(), c.end());
        std::cout << d.doc_id << "\t" << to_string(d.doc_type) << "\t" << c.size() << " chunks\n";
      }
      Index idx = build_index(std::move(chunks));
      save_index(idx, index_out);
      std::cout << idx.chunks.size() << " chunks, " << idx.postings.size() << " terms -> " << index_out << "\n";
    } else if (*query) {
      Index idx = load_index(query_index);
      std::optional<DocType> filter;
      if (!query_doc_type.empty()) filter = doc_type_from_string(query_doc_type);
      for (const auto& h : retrieve(idx, query_text, query_k, filter)) {
        const auto& c = idx.chunks[h.chunk];
        std::string preview = collapse_whitespace(c.text).substr(0, 100);
        std::printf("%.6f\t%s\t%s\t%s\n", h.score, c.chunk_id.c_str(), std::string(to_string(c.doc_type)).c_str(),
                    preview.c_str());
      }
    } else if (*prompt) {
      Setup setup = setup_from_string(prompt_setup);
      ExemplarPool pool = load_exemplar_pool(prompt_exemplars);
      std::optional<Index> idx;
      if (uses_docs(setup)) {
        if (prompt_index.empty()) throw ConfigError("setup " + prompt_setup + " needs --index");
        idx = load_index(prompt_index);
      }
      std::optional<DocType> filter;
      if (!prompt_doc_type.empty()) filter = doc_type_from_string(prompt_doc_type);
      std::map<std::string, CondensedAst> asts;
      if (uses_ast(setup)) {
        if (prompt_ast.empty()) throw ConfigError("setup " + prompt_setup + " needs --ast");
        for (const auto& entry : fs::directory_iterator(prompt_ast)) {
          if (entry.path().extension() != ".json") continue;
          json j = json::parse(read_file(entry.path()));
          for (const auto& item : j.contains("units") ? j.at("units") : json::array({j})) {
            CondensedAst a = condensed_from_json(item);
            asts[a.unit_id] = std::move(a);
          }
        }
      }
      std::string buf;
      std::size_t written = 0, skipped = 0;
      for (const auto& u : import_dataset(prompt_pairs)) {
        if (!prompt_all && !u.leading_comment) continue;
        PromptResources res;
        if (idx)
          for (const auto& h : retrieve(*idx, build_unit_query(u), prompt_k, filter))
            res.chunks.push_back({idx->chunks[h.chunk], h.score});
        if (uses_ast(setup)) {
          auto it = asts.find(u.id);
          if (it == asts.end()) {
            warn(u.id + ": no condensed AST; skipped");
            ++skipped;
            continue;
          }
          res.ast = it->second;
        }
        try {
          PromptBundle b = build_prompt(u, pool, ContextConfig::from(setup), std::move(res), prompt_budget);
          buf += to_json(b).dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
          ++written;
        } catch (const MultiPassRequired& e) {
          warn(u.id + ": " + e.what() + "; needs multi-pass generation");
          ++skipped;
        }
      }
      write_file(prompt_out, buf);
      std::cout << written << " prompts (" << skipped << " skipped) -> " << prompt_out << "\n";
    } else if (*complete) {
      ModelRegistry reg = registry_from(complete_registry);
      const ModelSpec& model = reg.get(complete_model);
      ClientOptions opts;
      if (!complete_cache.empty()) opts.cache_dir = complete_cache;
      LlmClient client = LlmClient::with_defaults(opts);
      std::vector<GeneratedComment> out;
      std::size_t failed = 0, hits = 0;
      for (const auto& j : read_jsonl(complete_prompts)) {
        PromptBundle b = bundle_from_json(j);
        try {
          out.push_back(client.complete(b, model, complete_params));
          hits += out.back().cached;
        } catch (const ExtractionError& e) {
          warn(b.target.id + ": " + e.what() + "\n--- raw output ---\n" + e.raw());
          ++failed;
        } catch (const ContextOverflow& e) {
          warn(b.target.id + ": " + e.what());
          ++failed;
        }
      }
      save_generated(out, complete_out);
      std::cout << out.size() << " comments (" << hits << " cached, " << failed << " failed) -> " << complete_out << "\n";
    } else if (*evaluate_cmd) {
      std::map<std::string, CodeUnit> units;
      for (auto& u : import_dataset(eval_pairs)) units.emplace(u.id, std::move(u));
      auto embedder = embedder_from(eval_embedder);
      ModelRegistry reg = registry_from(eval_registry);
      ClientOptions opts;
      if (!eval_cache.empty()) opts.cache_dir = eval_cache;
      LlmClient client = LlmClient::with_defaults(opts);
      const ModelSpec* judge = eval_judge.empty() ? nullptr : &reg.get(eval_judge);
      EvalOptions eo{embedder.get(), judge ? &client : nullptr, judge};
      std::vector<MetricReport> reports;
      for (const auto& g : load_generated(eval_generated)) {
        auto it = units.find(g.unit_id);
        if (it == units.end()) {
          warn(g.unit_id + ": not in " + eval_pairs);
          continue;
        }
        reports.push_back(evaluate(g, it->second, eo));
      }
      write_file(eval_out, metric_csv(reports));
      std::cout << reports.size() << " reports -> " << eval_out << "\n";
    } else if (*stats) {
      if (!stats_table.empty()) {
        std::vector<std::vector<double>> table;
        std::string spec = stats_table;
        std::replace(spec.begin(), spec.end(), '/', ';');
        std::size_t start = 0;
        while (start <= spec.size()) {
          std::size_t end = spec.find(';', start);
          if (end == std::string::npos) end = spec.size();
          std::vector<double> cells;
          std::string row = spec.substr(start, end - start);
          std::size_t s = 0;
          while (s <= row.size()) {
            std::size_t e = row.find(',', s);
            if (e == std::string::npos) e = row.size();
            cells.push_back(std::stod(row.substr(s, e - s)));
            s = e + 1;
          }
          table.push_back(cells);
          start = end + 1;
        }
        auto r = chi_square_two_tailed(table);
        std::printf("statistic %.6f\ndof %zu\np %.6g\n", r.statistic, r.dof, r.p_value);
      } else {
        if (stats_times.empty()) throw ConfigError("stats needs --times or --table");
        auto tables = time_analysis(parse_times_csv(read_file(stats_times)), binning_from_string(stats_binning));
        for (const auto& t : tables) {
          for (const auto& w : t.warnings) warn(w);
          std::cout << render_time_table(t) << "\n";
        }
        if (!stats_out.empty()) write_file(stats_out, times_csv(tables));
      }
    } else if (*classify_cmd) {
      ClassifyMethod method = classify_method_from_string(cls_method);
      std::map<std::string, CodeUnit> units;
      if (!cls_pairs.empty())
        for (auto& u : import_dataset(cls_pairs)) units.emplace(u.id, std::move(u));
      ModelRegistry reg = registry_from(cls_registry);
      ClientOptions opts;
      if (!cls_cache.empty()) opts.cache_dir = cls_cache;
      LlmClient client = LlmClient::with_defaults(opts);
      JudgeConfig judge;
      if (method == ClassifyMethod::Judge) {
        if (cls_judge.empty()) throw ConfigError("--method judge needs --judge <model>");
        judge = {&client, &reg.get(cls_judge)};
      }
      std::vector<CategoryLabel> labels;
      auto add = [&](const std::string& unit_id, const std::string& comment, const std::string& code,
                     CommentSource source, const std::string& group) {
        if (trim(comment).empty()) return;
        CategoryLabel l = classify_comment(comment, code, method, judge);
        l.unit_id = unit_id;
        l.source = source;
        l.group = group;
        labels.push_back(std::move(l));
      };
      if (!cls_generated.empty()) {
        for (const auto& g : load_generated(cls_generated)) {
          auto it = units.find(g.unit_id);
          std::string code = it != units.end() ? it->second.code : g.original_code;
          add(g.unit_id, g.text, code, CommentSource::Generated, g.model + " / " + std::string(display_name(g.setup)));
        }
      } else {
        if (units.empty()) throw ConfigError("classify needs --generated or --pairs");
        for (const auto& [id, u] : units)
          if (u.leading_comment) add(id, u.leading_comment->text, u.code, CommentSource::Original, "original");
      }
      std::string csv = "unit_id,source,group,method,categories\n";
      for (const auto& l : labels) {
        std::string cats;
        for (Category c : l.categories) cats += (cats.empty() ? "" : ";") + std::string(to_string(c));
        csv += csv_escape(l.unit_id) + "," + std::string(to_string(l.source)) + "," + csv_escape(l.group) + "," +
               std::string(to_string(l.method)) + "," + cats + "\n";
      }
      write_file(cls_out, csv);
      if (!labels.empty()) std::cout << render_distribution(category_distribution(labels));
      std::cout << labels.size() << " labels -> " << cls_out << "\n";
    } else if (*run_cmd) {
      Manifest m = load_manifest(run_manifest);
      ExperimentRun run = run_matrix(m);
      fs::path dir = write_run(run);
      write_report(run, dir / "report");
      for (const auto& f : run.failures)
        warn(f.unit_id + " [" + f.model + ", " + std::string(to_string(f.setup)) + "] " + f.stage + ": " + f.message);
      std::cout << "run " << run.run_id << ": " << run.counts["reports"] << " reports, " << run.counts["failures"]
                << " failures, " << run.counts["cache_hits"] << " cache hits -> " << dir.string() << "\n";
    } else if (*report_cmd) {
      fs::path dir = fs::is_directory(report_run) ? fs::path(report_run) : fs::path(report_runs_dir) / report_run;
      ExperimentRun run = load_run(dir);
      std::optional<std::vector<TimeTable>> times;
      if (!report_times.empty()) {
        times = time_analysis(parse_times_csv(read_file(report_times)), binning_from_string(report_binning),
                              run.manifest.models);
        for (const auto& t : *times)
          for (const auto& w : t.warnings) warn(w);
      }
      write_report(run, report_out, times ? &*times : nullptr);
      std::cout << read_file(fs::path(report_out) / "tables.txt");
    }
  } catch (const AstToolError& e) {
    std::cerr << "error: " << e.what() << "\n" << e.tool_stderr();
    return 1;
  } catch (const ProviderError& e) {
    std::cerr << "error: " << e.what() << "\n" << e.body() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << " (offset " << e.offset() << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
