#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "commentgen/astx.hpp"
#include "commentgen/corpus.hpp"
#include "commentgen/docstore.hpp"

namespace commentgen {

/// The four context configurations.
enum class Setup : std::uint8_t { Code, CodeAst, CodeDoc, CodeAstDoc };

inline constexpr std::array<Setup, 4> kAllSetups = {Setup::Code, Setup::CodeAst, Setup::CodeDoc,
                                                    Setup::CodeAstDoc};

std::string_view to_string(Setup setup);           // "code", "code+ast", ...
std::string_view display_name(Setup setup);        // "Code + AST + Design Doc"
Setup setup_from_string(std::string_view s);       // accepts either spelling
inline bool uses_ast(Setup s) { return s == Setup::CodeAst || s == Setup::CodeAstDoc; }
inline bool uses_docs(Setup s) { return s == Setup::CodeDoc || s == Setup::CodeAstDoc; }

inline constexpr std::string_view kDefaultPersona =
    "You are a novice software developer intending to maintain this code.";

enum class ExemplarLabel : std::uint8_t { Positive, Negative };

struct Exemplar {
  std::string id;
  std::string code;
  std::string comment;
  ExemplarLabel label = ExemplarLabel::Positive;

  bool operator==(const Exemplar&) const = default;
};

/// Exactly 30 exemplars, at least 10 of each label. Checked on construction.
class ExemplarPool {
 public:
  static constexpr std::size_t kSize = 30;
  static constexpr std::size_t kMinPerLabel = 10;

  ExemplarPool(std::vector<Exemplar> exemplars, std::uint64_t seed = 0);

  const std::vector<Exemplar>& exemplars() const { return exemplars_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::vector<Exemplar> exemplars_;
  std::uint64_t seed_;
};

/// JSONL records {id, code, comment, label: "positive"|"negative"}.
ExemplarPool load_exemplar_pool(const std::filesystem::path& path, std::uint64_t seed = 0);

enum class BlockKind : std::uint8_t { Code, Ast, DocChunk, PriorComments };
std::string_view to_string(BlockKind kind);
BlockKind block_kind_from_string(std::string_view s);

struct ContextBlock {
  BlockKind kind = BlockKind::Code;
  std::string text;
  std::string source;  // chunk id, unit id, ...
  double score = 0.0;  // retrieval score for doc chunks

  bool operator==(const ContextBlock&) const = default;
};

struct ScoredChunk {
  DocChunk chunk;
  double score = 0.0;
};

struct ContextConfig {
  bool use_ast = false;
  bool use_docs = false;

  static ContextConfig from(Setup s) { return {uses_ast(s), uses_docs(s)}; }
};

struct PromptResources {
  std::optional<CondensedAst> ast;
  std::vector<ScoredChunk> chunks;  // retrieval order
  /// Replaces the unit's own comment-stripped code, e.g. with a
  /// header-expanded file.
  std::optional<std::string> code;
};

struct PromptBundle {
  std::string persona;
  std::vector<Exemplar> exemplars;  // in prompt order
  std::vector<ContextBlock> context_blocks;
  std::string instruction;
  CodeUnit target;
  Setup setup = Setup::Code;
  std::size_t budget = 0;
  std::size_t token_estimate = 0;
  std::size_t pass_index = 0;
  /// Everything the bundle could have used; budget shrinking re-fits from these.
  PromptResources available;

  std::vector<std::string> exemplars_used() const;
  const ContextBlock& code_block() const;
};

/// Raised when persona, exemplars, code and instruction alone exceed the
/// budget. The caller is expected to fall back to plan_passes.
class MultiPassRequired : public Error {
 public:
  MultiPassRequired(const std::string& what, std::size_t needed, std::size_t budget)
      : Error(what), needed_(needed), budget_(budget) {}
  std::size_t needed() const { return needed_; }
  std::size_t budget() const { return budget_; }

 private:
  std::size_t needed_;
  std::size_t budget_;
};

std::string default_instruction(const CodeUnit& unit);

/// Persona, exemplars, doc chunks, condensed AST, code, instruction. Over
/// budget, doc chunks go first (lowest score first), then AST nodes from the
/// end of the priority order, never the code.
PromptBundle build_prompt(const CodeUnit& unit, const ExemplarPool& pool, ContextConfig config,
                          PromptResources resources, std::size_t budget);

std::string render_prompt(const PromptBundle& bundle);

nlohmann::json to_json(const PromptBundle& bundle);
PromptBundle bundle_from_json(const nlohmann::json& j);

enum class VariantKind : std::uint8_t { OrderPermutation, Rewording, ContextShrink };
std::string_view to_string(VariantKind kind);
VariantKind variant_kind_from_string(std::string_view s);

struct VariantSet {
  std::vector<PromptBundle> bundles;
  std::vector<std::string> warnings;
};

const std::vector<std::string_view>& instruction_paraphrases();

/// The target code block is byte-identical in every variant.
VariantSet make_variants(const PromptBundle& bundle, VariantKind kind, std::size_t n, std::uint64_t seed);

struct Pass {
  std::size_t index = 0;
  std::vector<std::string> unit_ids;
  std::vector<std::string> carried_unit_ids;  // units commented in earlier passes
};

struct SkippedUnit {
  std::string unit_id;
  std::string diagnostic;
};

struct PassPlan {
  std::vector<Pass> passes;
  std::vector<SkippedUnit> skipped;
};

/// Tokens a unit occupies in a pass: its comment-stripped code.
std::size_t unit_cost(const CodeUnit& unit);

/// Greedy packing of consecutive units under `budget`.
PassPlan plan_passes(const SourceFile& file, const std::vector<CodeUnit>& units, std::size_t budget);

/// Prompt for one pass; the comments already produced for carried units
/// enter as a PriorComments block. No AST or doc context.
PromptBundle build_pass_prompt(const Pass& pass, const std::vector<CodeUnit>& units, const ExemplarPool& pool,
                               const std::vector<std::pair<std::string, std::string>>& prior_comments,
                               std::size_t budget);

}  // namespace commentgen
