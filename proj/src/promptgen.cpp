#include "commentgen/promptgen.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "commentgen/error.hpp"
#include "commentgen/lexer.hpp"
#include "commentgen/text.hpp"

namespace commentgen {
namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Setup setup) {
  switch (setup) {
    case Setup::Code: return "code";
    case Setup::CodeAst: return "code+ast";
    case Setup::CodeDoc: return "code+doc";
    case Setup::CodeAstDoc: return "code+ast+doc";
  }
  return "code";
}

std::string_view display_name(Setup setup) {
  switch (setup) {
    case Setup::Code: return "Code";
    case Setup::CodeAst: return "Code + AST";
    case Setup::CodeDoc: return "Code + Design Doc";
    case Setup::CodeAstDoc: return "Code + AST + Design Doc";
  }
  return "Code";
}

Setup setup_from_string(std::string_view s) {
  for (Setup setup : kAllSetups)
    if (s == to_string(setup) || s == display_name(setup)) return setup;
  throw ConfigError("unknown setup '" + std::string(s) + "' (expected code, code+ast, code+doc or code+ast+doc)");
}

ExemplarPool::ExemplarPool(std::vector<Exemplar> exemplars, std::uint64_t seed)
    : exemplars_(std::move(exemplars)), seed_(seed) {
  std::size_t positive = 0;
  for (const auto& e : exemplars_) positive += e.label == ExemplarLabel::Positive;
  std::size_t negative = exemplars_.size() - positive;
  if (exemplars_.size() != kSize || positive < kMinPerLabel || negative < kMinPerLabel)
    throw PreconditionError("exemplar pool needs exactly " + std::to_string(kSize) + " exemplars with at least " +
                            std::to_string(kMinPerLabel) + " of each label (got " + std::to_string(exemplars_.size()) +
                            ": " + std::to_string(positive) + " positive, " + std::to_string(negative) +
                            " negative)");
}

ExemplarPool load_exemplar_pool(const fs::path& path, std::uint64_t seed) {
  std::vector<Exemplar> out;
  std::string data = read_file(path);
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(data)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      Exemplar e;
      e.id = j.value("id", "ex" + std::to_string(out.size() + 1));
      e.code = j.at("code").get<std::string>();
      e.comment = j.at("comment").get<std::string>();
      std::string label = to_lower(j.at("label").get<std::string>());
      if (label == "positive" || label == "good") e.label = ExemplarLabel::Positive;
      else if (label == "negative" || label == "bad") e.label = ExemplarLabel::Negative;
      else throw ConfigError("label must be positive or negative, got '" + label + "'");
      out.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ExemplarPool(std::move(out), seed);
}

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::Code: return "code";
    case BlockKind::Ast: return "ast";
    case BlockKind::DocChunk: return "doc";
    case BlockKind::PriorComments: return "prior_comments";
  }
  return "code";
}

BlockKind block_kind_from_string(std::string_view s) {
  for (BlockKind k : {BlockKind::Code, BlockKind::Ast, BlockKind::DocChunk, BlockKind::PriorComments})
    if (to_string(k) == s) return k;
  throw ParseError("unknown block kind '" + std::string(s) + "'", 0);
}

std::vector<std::string> PromptBundle::exemplars_used() const {
  std::vector<std::string> ids;
  for (const auto& e : exemplars) ids.push_back(e.id);
  return ids;
}

const ContextBlock& PromptBundle::code_block() const {
  for (const auto& b : context_blocks)
    if (b.kind == BlockKind::Code) return b;
  throw PreconditionError("bundle has no code block");
}

namespace {

const std::vector<std::string_view> kParaphrases = {
    "Write a docstring-style comment for the function `{name}` that explains what it does, how, and anything a "
    "maintainer must know before changing it. Return the code in one fenced block with the comment directly above "
    "the signature and the code otherwise unchanged.",
    "Add an explanatory doc comment above `{name}` describing its purpose, its behaviour and the pitfalls a "
    "maintainer should watch for. Reply with the unchanged code plus the comment, in a single fenced block.",
    "Document the function `{name}` for someone who will maintain it: place a docstring-style comment right above "
    "its signature. Answer with the complete code in one fenced code block; do not alter the code.",
    "Explain `{name}` in a comment written for a future maintainer and put it immediately before the function "
    "signature. Output only a fenced code block containing the code with your comment added.",
    "Produce a maintenance-oriented docstring comment for `{name}`. Insert it above the signature, keep every line "
    "of code as it is, and return the result as one fenced code block.",
    "Help a maintainer understand `{name}`: write a doc comment covering intent, behaviour and limitations, "
    "insert it before the signature, and respond with the untouched code and comment in one fenced block.",
    "Annotate the function `{name}` with a docstring-style comment placed above its signature. Keep the code "
    "byte-for-byte identical and reply with a single fenced code block.",
    "Give `{name}` an explanatory leading comment useful to whoever maintains this code next. Return the code, "
    "unchanged except for that comment, inside one fenced block.",
};

std::string fill_name(std::string_view tmpl, const std::string& name) {
  std::string out(tmpl);
  auto p = out.find("{name}");
  if (p != std::string::npos) out.replace(p, 6, name);
  return out;
}

std::string render_exemplar(std::size_t ordinal, const Exemplar& e) {
  std::string out = "Example " + std::to_string(ordinal) +
                    (e.label == ExemplarLabel::Positive ? " (good comment)\n" : " (bad comment)\n");
  out += "Comment: " + e.comment + "\n";
  out += "Code:\n" + e.code + "\n\n";
  return out;
}

std::string render_block(const ContextBlock& b, const std::string& fence_lang) {
  switch (b.kind) {
    case BlockKind::DocChunk: return "[" + b.source + "]\n" + b.text + "\n\n";
    case BlockKind::Ast: return "Condensed AST:\n" + b.text + "\n";
    case BlockKind::PriorComments: return "Comments already written for earlier functions in this file:\n" + b.text + "\n";
    case BlockKind::Code: return "Code:\n```" + fence_lang + "\n" + b.text + (b.text.empty() || b.text.back() != '\n' ? "\n" : "") + "```\n\n";
  }
  return {};
}

ContextBlock make_code_block(const CodeUnit& unit, const PromptResources& resources) {
  ContextBlock code;
  code.kind = BlockKind::Code;
  code.source = unit.id;
  code.text = resources.code ? *resources.code : strip_comments(unit.code);
  return code;
}

std::size_t bundle_tokens(const PromptBundle& b) { return estimate_tokens(render_prompt(b).size()); }

// Fills the context blocks of `b` from b.available under `budget`.
void fit(PromptBundle& b, std::size_t budget) {
  ContextBlock code = make_code_block(b.target, b.available);
  b.budget = budget;

  std::vector<ScoredChunk> chunks = uses_docs(b.setup) ? b.available.chunks : std::vector<ScoredChunk>{};
  std::optional<CondensedAst> ast = uses_ast(b.setup) ? b.available.ast : std::nullopt;
  std::size_t ast_nodes = ast ? ast->nodes.size() : 0;
  std::vector<ContextBlock> prior;
  for (const auto& blk : b.context_blocks)
    if (blk.kind == BlockKind::PriorComments) prior.push_back(blk);

  auto assemble = [&](std::size_t n_nodes) {
    b.context_blocks.clear();
    for (const auto& c : chunks) b.context_blocks.push_back({BlockKind::DocChunk, c.chunk.text, c.chunk.chunk_id, c.score});
    if (ast && n_nodes > 0) b.context_blocks.push_back({BlockKind::Ast, render_condensed(take_prefix(*ast, n_nodes)), ast->unit_id, 0.0});
    b.context_blocks.insert(b.context_blocks.end(), prior.begin(), prior.end());
    b.context_blocks.push_back(code);
    b.token_estimate = bundle_tokens(b);
    return b.token_estimate <= budget;
  };

  if (assemble(ast_nodes)) return;
  while (!chunks.empty()) {
    // lowest score goes first; among equal scores the later-ranked chunk
    auto victim = chunks.begin();
    for (auto it = chunks.begin(); it != chunks.end(); ++it)
      if (it->score <= victim->score) victim = it;
    chunks.erase(victim);
    if (assemble(ast_nodes)) return;
  }
  if (ast_nodes > 0) {
    // largest node prefix that fits; rendered size grows with the prefix
    std::size_t lo = 0, hi = ast_nodes;
    while (lo < hi) {
      std::size_t mid = (lo + hi + 1) / 2;
      if (assemble(mid)) lo = mid;
      else hi = mid - 1;
    }
    if (assemble(lo)) return;
  }
  throw MultiPassRequired("prompt for " + b.target.id + " needs " + std::to_string(b.token_estimate) +
                              " tokens without any optional context; budget is " + std::to_string(budget),
                          b.token_estimate, budget);
}

}  // namespace

std::string default_instruction(const CodeUnit& unit) { return fill_name(kParaphrases.front(), unit.name); }

const std::vector<std::string_view>& instruction_paraphrases() { return kParaphrases; }

std::string render_prompt(const PromptBundle& b) {
  std::string fence = b.target.language == Language::CPP ? "cpp" : "c";
  std::string out = b.persona + "\n\n";
  if (!b.exemplars.empty()) {
    out += "Here are examples of good and bad comments:\n\n";
    for (std::size_t i = 0; i < b.exemplars.size(); ++i) out += render_exemplar(i + 1, b.exemplars[i]);
  }
  bool docs_header = false;
  for (const auto& block : b.context_blocks) {
    if (block.kind == BlockKind::DocChunk && !docs_header) {
      out += "Relevant design documentation:\n";
      docs_header = true;
    }
    out += render_block(block, fence);
  }
  out += b.instruction;
  out += '\n';
  return out;
}

PromptBundle build_prompt(const CodeUnit& unit, const ExemplarPool& pool, ContextConfig config,
                          PromptResources resources, std::size_t budget) {
  if (config.use_ast && !resources.ast)
    throw PreconditionError("AST context requested but no condensed AST is available for " + unit.id);
  PromptBundle b;
  b.persona = std::string(kDefaultPersona);
  b.exemplars = pool.exemplars();
  b.instruction = default_instruction(unit);
  b.target = unit;
  b.setup = config.use_ast ? (config.use_docs ? Setup::CodeAstDoc : Setup::CodeAst)
                           : (config.use_docs ? Setup::CodeDoc : Setup::Code);
  if (!config.use_ast) resources.ast.reset();
  if (!config.use_docs) resources.chunks.clear();
  b.available = std::move(resources);
  fit(b, budget);
  return b;
}

std::string_view to_string(VariantKind kind) {
  switch (kind) {
    case VariantKind::OrderPermutation: return "order";
    case VariantKind::Rewording: return "wording";
    case VariantKind::ContextShrink: return "shrink";
  }
  return "order";
}

VariantKind variant_kind_from_string(std::string_view s) {
  for (VariantKind k : {VariantKind::OrderPermutation, VariantKind::Rewording, VariantKind::ContextShrink})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown variant kind '" + std::string(s) + "' (expected order, wording or shrink)");
}

VariantSet make_variants(const PromptBundle& bundle, VariantKind kind, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw PreconditionError("make_variants requires n >= 1");
  VariantSet out;
  std::mt19937_64 rng(seed);
  switch (kind) {
    case VariantKind::OrderPermutation:
      for (std::size_t i = 0; i < n; ++i) {
        PromptBundle v = bundle;
        std::shuffle(v.exemplars.begin(), v.exemplars.end(), rng);
        out.bundles.push_back(std::move(v));
      }
      break;
    case VariantKind::Rewording: {
      std::vector<std::string> choices;
      for (auto p : kParaphrases) {
        std::string text = fill_name(p, bundle.target.name);
        if (text != bundle.instruction) choices.push_back(std::move(text));
      }
      std::shuffle(choices.begin(), choices.end(), rng);
      if (n > choices.size()) {
        out.warnings.push_back("only " + std::to_string(choices.size()) + " rewordings available; " +
                               std::to_string(n) + " requested");
        n = choices.size();
      }
      for (std::size_t i = 0; i < n; ++i) {
        PromptBundle v = bundle;
        v.instruction = choices[i];
        try {
          fit(v, bundle.budget);
          out.bundles.push_back(std::move(v));
        } catch (const MultiPassRequired& e) {
          out.warnings.push_back(std::string("rewording omitted: ") + e.what());
        }
      }
      break;
    }
    case VariantKind::ContextShrink:
      for (std::size_t i = 1; i <= n; ++i) {
        std::size_t budget = bundle.token_estimate * (n + 1 - i) / (n + 1);
        PromptBundle v = bundle;
        try {
          fit(v, budget);
          out.bundles.push_back(std::move(v));
        } catch (const MultiPassRequired&) {
          out.warnings.push_back("context shrink to " + std::to_string(budget) +
                                 " tokens omitted: the code alone does not fit");
        }
      }
      break;
  }
  return out;
}

std::size_t unit_cost(const CodeUnit& unit) { return estimate_tokens(strip_comments(unit.code).size()); }

PassPlan plan_passes(const SourceFile& file, const std::vector<CodeUnit>& units, std::size_t budget) {
  PassPlan plan;
  for (const auto& u : units)
    if (u.path != file.path || u.repo_id != file.repo_id)
      throw PreconditionError("unit " + u.id + " does not belong to " + file.path);
  for (std::size_t i = 1; i < units.size(); ++i)
    if (units[i].start_byte < units[i - 1].start_byte)
      throw PreconditionError("units must be ordered by position");

  std::vector<std::string> done;
  Pass current;
  std::size_t used = 0;
  auto flush = [&] {
    if (current.unit_ids.empty()) return;
    current.index = plan.passes.size();
    current.carried_unit_ids = done;
    done.insert(done.end(), current.unit_ids.begin(), current.unit_ids.end());
    plan.passes.push_back(std::move(current));
    current = Pass{};
    used = 0;
  };
  for (const auto& u : units) {
    std::size_t cost = unit_cost(u);
    if (cost > budget) {
      plan.skipped.push_back({u.id, u.name + " needs " + std::to_string(cost) + " tokens on its own; budget is " +
                                        std::to_string(budget)});
      continue;
    }
    if (used + cost > budget) flush();
    current.unit_ids.push_back(u.id);
    used += cost;
  }
  flush();
  return plan;
}

PromptBundle build_pass_prompt(const Pass& pass, const std::vector<CodeUnit>& units, const ExemplarPool& pool,
                               const std::vector<std::pair<std::string, std::string>>& prior_comments,
                               std::size_t budget) {
  std::vector<const CodeUnit*> members;
  for (const auto& id : pass.unit_ids) {
    auto it = std::find_if(units.begin(), units.end(), [&](const CodeUnit& u) { return u.id == id; });
    if (it == units.end()) throw PreconditionError("pass refers to unknown unit " + id);
    members.push_back(&*it);
  }
  if (members.empty()) throw PreconditionError("empty pass");

  PromptBundle b;
  b.persona = std::string(kDefaultPersona);
  b.exemplars = pool.exemplars();
  b.target = *members.front();
  b.pass_index = pass.index;
  b.budget = budget;
  std::string names;
  std::string code;
  for (const CodeUnit* u : members) {
    if (!names.empty()) names += "`, `";
    names += u->name;
    if (!code.empty()) code += "\n\n";
    code += strip_comments(u->code);
  }
  b.instruction = fill_name(kParaphrases.front(), names);
  std::string carried;
  for (const auto& [unit_id, comment] : prior_comments)
    if (std::find(pass.carried_unit_ids.begin(), pass.carried_unit_ids.end(), unit_id) != pass.carried_unit_ids.end())
      carried += unit_id + ": " + comment + "\n";
  if (!carried.empty()) b.context_blocks.push_back({BlockKind::PriorComments, carried, "", 0.0});
  b.context_blocks.push_back({BlockKind::Code, code, b.target.id, 0.0});
  b.available.code = code;
  b.token_estimate = bundle_tokens(b);
  if (b.token_estimate > budget)
    throw MultiPassRequired("pass " + std::to_string(pass.index) + " needs " + std::to_string(b.token_estimate) +
                                " tokens; budget is " + std::to_string(budget),
                            b.token_estimate, budget);
  return b;
}

json to_json(const PromptBundle& b) {
  json j;
  j["persona"] = b.persona;
  json ex = json::array();
  for (const auto& e : b.exemplars)
    ex.push_back({{"id", e.id}, {"code", e.code}, {"comment", e.comment},
                  {"label", e.label == ExemplarLabel::Positive ? "positive" : "negative"}});
  j["exemplars"] = std::move(ex);
  json blocks = json::array();
  for (const auto& c : b.context_blocks)
    blocks.push_back({{"kind", to_string(c.kind)}, {"text", c.text}, {"source", c.source}, {"score", c.score}});
  j["context_blocks"] = std::move(blocks);
  j["instruction"] = b.instruction;
  j["target"] = json::parse(unit_to_json(b.target).dump());
  j["setup"] = to_string(b.setup);
  j["budget"] = b.budget;
  j["token_estimate"] = b.token_estimate;
  j["pass_index"] = b.pass_index;
  json avail;
  if (b.available.ast) avail["ast"] = to_json(*b.available.ast);
  json chunks = json::array();
  for (const auto& c : b.available.chunks)
    chunks.push_back({{"chunk_id", c.chunk.chunk_id}, {"doc_id", c.chunk.doc_id},
                      {"doc_type", to_string(c.chunk.doc_type)}, {"ordinal", c.chunk.ordinal},
                      {"text", c.chunk.text}, {"score", c.score}});
  avail["chunks"] = std::move(chunks);
  if (b.available.code) avail["code"] = *b.available.code;
  j["available"] = std::move(avail);
  return j;
}

PromptBundle bundle_from_json(const json& j) {
  PromptBundle b;
  try {
    b.persona = j.at("persona").get<std::string>();
    for (const auto& e : j.at("exemplars"))
      b.exemplars.push_back({e.at("id").get<std::string>(), e.at("code").get<std::string>(),
                             e.at("comment").get<std::string>(),
                             e.at("label").get<std::string>() == "positive" ? ExemplarLabel::Positive
                                                                           : ExemplarLabel::Negative});
    for (const auto& c : j.at("context_blocks"))
      b.context_blocks.push_back({block_kind_from_string(c.at("kind").get<std::string>()), c.at("text").get<std::string>(),
                                  c.value("source", std::string{}), c.value("score", 0.0)});
    b.instruction = j.at("instruction").get<std::string>();
    b.target = unit_from_json(nlohmann::ordered_json::parse(j.at("target").dump()));
    b.setup = setup_from_string(j.at("setup").get<std::string>());
    b.budget = j.at("budget").get<std::size_t>();
    b.token_estimate = j.at("token_estimate").get<std::size_t>();
    b.pass_index = j.value("pass_index", std::size_t{0});
    if (j.contains("available")) {
      const json& a = j.at("available");
      if (a.contains("ast")) b.available.ast = condensed_from_json(a.at("ast"));
      for (const auto& c : a.value("chunks", json::array())) {
        ScoredChunk sc;
        sc.chunk.chunk_id = c.at("chunk_id").get<std::string>();
        sc.chunk.doc_id = c.at("doc_id").get<std::string>();
        sc.chunk.doc_type = doc_type_from_string(c.at("doc_type").get<std::string>());
        sc.chunk.ordinal = c.at("ordinal").get<std::uint32_t>();
        sc.chunk.text = c.at("text").get<std::string>();
        sc.score = c.at("score").get<double>();
        b.available.chunks.push_back(std::move(sc));
      }
      if (a.contains("code")) b.available.code = a.at("code").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed prompt bundle: ") + e.what(), 0);
  }
  return b;
}

}  // namespace commentgen
