#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "commentgen/corpus.hpp"
#include "commentgen/error.hpp"
#include "json.hpp"

namespace commentgen {

enum class FlagSource { Makefile, Override };

struct BuildFlags {
  std::vector<std::string> cflags;
  std::vector<std::string> cppflags;
  FlagSource source = FlagSource::Override;
  std::vector<std::string> warnings;

  std::vector<std::string> all() const;
};

struct RecoverOptions {
  std::string make_program = "make";
};

/// Effective CFLAGS/CPPFLAGS of a makefile. A print target is injected
/// through a wrapper makefile and make runs in dry-run mode, so variable
/// expansion is make's own. Falls back to scraping assignments statically
/// when make fails. A missing makefile yields empty Override flags.
BuildFlags recover_flags(const std::filesystem::path& makefile, const RecoverOptions& options = {});

/// Assignment scraping (=, :=, ::=, +=, ?=) with $(VAR)/${VAR} expansion
/// from earlier assignments and the environment.
BuildFlags scrape_flags(std::string_view makefile_text);

BuildFlags override_flags(std::string_view cflags, std::string_view cppflags = {});

class AstToolError : public Error {
 public:
  AstToolError(const std::string& what, std::string tool_stderr)
      : Error(what), tool_stderr_(std::move(tool_stderr)) {}
  const std::string& tool_stderr() const noexcept { return tool_stderr_; }

 private:
  std::string tool_stderr_;
};

inline constexpr std::string_view kDefaultAstTool =
    "clang -Xclang -ast-dump=json -fsyntax-only {flags} {file}";

struct AstToolConfig {
  std::string tool_template = std::string(kDefaultAstTool);
  std::optional<std::filesystem::path> working_dir;
  std::optional<std::filesystem::path> cache_dir;
};

/// A frontend JSON dump with pointer-valued ids renamed to stable ordinals,
/// so identical inputs give byte-identical `text`.
struct AstDocument {
  nlohmann::json root;
  std::string text;
};

/// Parses and normalizes a raw dump. Malformed JSON raises ParseError with
/// the byte offset reported by the parser.
AstDocument parse_ast_dump(std::string_view raw);

/// Runs the tool template (`{file}`, `{flags}` placeholders; no shell).
/// A nonzero exit raises AstToolError carrying the tool's stderr.
/// With a cache_dir, dumps are cached by (file digest, flags+tool digest).
AstDocument dump_ast(const std::filesystem::path& file, const BuildFlags& flags,
                     const AstToolConfig& config = {});

enum class AstNodeKind {
  Function,
  Parameter,
  Compound,
  Call,
  If,
  Loop,
  Return,
  Declaration,
  Record,
  Field,
  Enum,
  Enumerator
};

std::string_view to_string(AstNodeKind kind);
AstNodeKind ast_node_kind_from_string(std::string_view s);

struct AstNode {
  AstNodeKind kind = AstNodeKind::Function;
  std::string name;
  std::string type_text;
  std::string value;  // literal spelling, at most 16 characters
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;
  std::size_t depth = 0;
  std::string origin;  // identity: normalized dump id plus role

  bool operator==(const AstNode&) const = default;
};

/// Structural summary of one unit. Nodes are stored in priority order:
/// the root signature, the unit's own subtree (pre-order), callee
/// signatures, then referenced record/enum types. Every prefix is a
/// well-formed single-rooted tree.
struct CondensedAst {
  std::string unit_id;
  std::vector<AstNode> nodes;
  std::vector<std::string> callees;
  std::size_t token_estimate = 0;

  bool operator==(const CondensedAst&) const = default;
};

/// Keeps the longest priority-order prefix whose rendering fits `budget`
/// tokens. The root is always kept, so a budget below the root's own cost
/// yields the root alone. Throws Error when the unit is not in the dump.
CondensedAst condense(const AstDocument& doc, const CodeUnit& unit, std::size_t budget);

/// Indented one-line-per-node text used as prompt context.
std::string render_condensed(const CondensedAst& ast);

/// Largest prefix fitting `budget` tokens (root always kept).
CondensedAst truncate_condensed(const CondensedAst& ast, std::size_t budget);
/// First `count` nodes (at least the root when non-empty).
CondensedAst take_prefix(const CondensedAst& ast, std::size_t count);

nlohmann::json to_json(const CondensedAst& ast);
CondensedAst condensed_from_json(const nlohmann::json& j);

}  // namespace commentgen
