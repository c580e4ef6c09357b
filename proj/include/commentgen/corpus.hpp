#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "commentgen/lexer.hpp"

namespace commentgen {

enum class Language { C, CPP };

std::string_view to_string(Language lang);
/// Language for a C/C++ extension (.c/.h -> C; .cc/.cpp/.cxx/.hpp/.hh/.hxx -> CPP).
std::optional<Language> language_for_path(const std::filesystem::path& path);

struct SourceFile {
  std::string repo_id;
  std::string path;  // relative to the repository root, '/' separated
  Language language = Language::C;
  std::string content;
  std::size_t size_bytes = 0;
};

struct CodeUnit {
  std::string id;
  std::string repo_id;
  std::string path;
  Language language = Language::C;
  std::string name;       // possibly qualified, e.g. "json::dump"
  std::string signature;  // whitespace-collapsed text before the body
  std::size_t start_byte = 0;  // first byte of the signature
  std::size_t body_begin = 0;  // '{'
  std::size_t body_end = 0;    // one past the matching '}'
  std::optional<CommentBlock> leading_comment;
  std::size_t loc = 1;
  std::string code;  // content[start_byte, body_end)

  bool operator==(const CodeUnit&) const = default;
};

struct ScanConfig {
  std::string repo_id;  // defaults to the root directory name
  /// A pattern without '/' matches any path component; a pattern with '/'
  /// is matched against the whole relative path ('*' crosses '/').
  std::vector<std::string> ignore_globs = default_ignores();

  static std::vector<std::string> default_ignores();
};

struct ScanResult {
  std::vector<SourceFile> files;  // sorted by path
  std::vector<std::string> warnings;
};

/// Throws IoError when `root` is missing or unreadable.
ScanResult scan_repo(const std::filesystem::path& root, const ScanConfig& config = {});

bool path_ignored(std::string_view relative_path, const std::vector<std::string>& globs);

/// One unit per top-level, namespace-scope or class-scope function
/// definition. A comment block that starts its own line and ends at most one
/// blank line above the signature becomes the leading comment.
///
/// Preprocessor conditionals follow their first branch (the `#else` branch
/// of `#if 0`), so alternative signatures do not unbalance the braces.
/// Throws ParseError with the offending offset on unbalanced braces.
std::vector<CodeUnit> extract_pairs(const SourceFile& file);

struct ExpandOptions {
  std::size_t max_depth = 8;
};

struct Expansion {
  std::string text;
  std::vector<std::string> warnings;
};

/// Inlines quoted includes (comment-stripped, recursively). Headers guarded
/// by `#pragma once` or an include guard are expanded once; a header already
/// on the include stack is replaced by a marker line. Angle-bracket includes
/// and unresolvable headers are left as they are.
Expansion expand_headers(const std::filesystem::path& file_path,
                         const std::vector<std::filesystem::path>& search_paths,
                         const ExpandOptions& options = {});

/// Writes one JSON object per line, ordered by (repo, path, start_byte).
/// Returns the number of records written.
std::size_t export_dataset(std::vector<CodeUnit> units, const std::filesystem::path& out);
std::vector<CodeUnit> import_dataset(const std::filesystem::path& in);

nlohmann::ordered_json unit_to_json(const CodeUnit& unit);
CodeUnit unit_from_json(const nlohmann::ordered_json& j);

}  // namespace commentgen
