#include "commentgen/corpus.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>

#include "commentgen/error.hpp"
#include "commentgen/text.hpp"
#include "json.hpp"

namespace commentgen {
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Language lang) { return lang == Language::C ? "C" : "CPP"; }

std::optional<Language> language_for_path(const fs::path& path) {
  std::string ext = to_lower(path.extension().string());
  if (ext == ".c" || ext == ".h") return Language::C;
  if (ext == ".cc" || ext == ".cpp" || ext == ".cxx" || ext == ".hpp" || ext == ".hh" || ext == ".hxx")
    return Language::CPP;
  return std::nullopt;
}

std::vector<std::string> ScanConfig::default_ignores() {
  return {"build", "build-*", "cmake-build-*", "_build", "third_party", "third-party",
          "thirdparty", "3rdparty", "vendor", ".git"};
}

bool path_ignored(std::string_view relative_path, const std::vector<std::string>& globs) {
  std::string rel(relative_path);
  for (const auto& g : globs) {
    if (g.find('/') != std::string::npos) {
      if (fnmatch(g.c_str(), rel.c_str(), 0) == 0) return true;
      continue;
    }
    std::size_t start = 0;
    while (start <= rel.size()) {
      std::size_t slash = rel.find('/', start);
      std::string comp = rel.substr(start, slash == std::string::npos ? std::string::npos : slash - start);
      if (fnmatch(g.c_str(), comp.c_str(), 0) == 0) return true;
      if (slash == std::string::npos) break;
      start = slash + 1;
    }
  }
  return false;
}

ScanResult scan_repo(const fs::path& root, const ScanConfig& config) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("repository root is not a readable directory: " + root.string());
  fs::directory_iterator probe(root, ec);
  if (ec) throw IoError("cannot read repository root " + root.string() + ": " + ec.message());

  ScanResult result;
  std::string repo_id = config.repo_id;
  if (repo_id.empty()) repo_id = fs::absolute(root).lexically_normal().filename().string();
  if (repo_id.empty()) repo_id = fs::absolute(root).lexically_normal().parent_path().filename().string();

  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  for (; !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    const auto& entry = *it;
    std::string rel = entry.path().lexically_relative(root).generic_string();
    std::error_code type_ec;
    if (entry.is_directory(type_ec)) {
      if (path_ignored(rel, config.ignore_globs)) it.disable_recursion_pending();
      continue;
    }
    if (!entry.is_regular_file(type_ec)) continue;
    auto lang = language_for_path(entry.path());
    if (!lang || path_ignored(rel, config.ignore_globs)) continue;
    SourceFile f;
    f.repo_id = repo_id;
    f.path = rel;
    f.language = *lang;
    try {
      f.content = read_file(entry.path());
    } catch (const IoError& e) {
      result.warnings.push_back(std::string("skipped unreadable file: ") + e.what());
      continue;
    }
    f.size_bytes = f.content.size();
    result.files.push_back(std::move(f));
  }
  if (ec) result.warnings.push_back("directory walk stopped early: " + ec.message());
  std::sort(result.files.begin(), result.files.end(),
            [](const SourceFile& a, const SourceFile& b) { return a.path < b.path; });
  return result;
}

namespace {

enum class TokKind { Ident, Number, Literal, Punct };

struct Token {
  TokKind kind;
  std::string_view text;
  std::size_t offset;
};

struct CondFrame {
  bool parent_active;
  bool taken;
  bool active;
};

// Tokenizes the masked source, dropping preprocessor directives and tokens in
// inactive conditional branches.
std::vector<Token> tokenize_structure(std::string_view m) {
  std::vector<Token> toks;
  std::vector<CondFrame> conds;
  auto active = [&] { return conds.empty() || conds.back().active; };
  bool line_start = true;
  std::size_t i = 0;
  const std::size_t n = m.size();
  while (i < n) {
    char c = m[i];
    if (c == '\n') {
      line_start = true;
      ++i;
      continue;
    }
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (c == '#' && line_start) {
      std::size_t e = i;
      while (e < n) {
        if (m[e] == '\n') {
          std::size_t k = e;
          if (k > i && m[k - 1] == '\r') --k;
          if (k > i && m[k - 1] == '\\') {
            ++e;
            continue;
          }
          break;
        }
        ++e;
      }
      std::string_view line = trim(m.substr(i + 1, e - i - 1));
      std::size_t name_end = 0;
      while (name_end < line.size() && is_ident_char(line[name_end])) ++name_end;
      std::string_view name = line.substr(0, name_end);
      std::string_view rest = trim(line.substr(name_end));
      bool parent = active();
      if (name == "if" || name == "ifdef" || name == "ifndef") {
        bool zero = name == "if" && rest == "0";
        conds.push_back({parent, !zero, parent && !zero});
      } else if (name == "elif" && !conds.empty()) {
        auto& f = conds.back();
        if (!f.taken && rest != "0") {
          f.active = f.parent_active;
          f.taken = true;
        } else {
          f.active = false;
        }
      } else if (name == "else" && !conds.empty()) {
        auto& f = conds.back();
        f.active = f.parent_active && !f.taken;
        f.taken = true;
      } else if (name == "endif" && !conds.empty()) {
        conds.pop_back();
      }
      i = e;
      continue;
    }
    line_start = false;
    if (!active()) {
      ++i;
      continue;
    }
    std::size_t b = i;
    if (is_ident_start(c) || c == '$') {
      while (i < n && (is_ident_char(m[i]) || m[i] == '$')) ++i;
      toks.push_back({TokKind::Ident, m.substr(b, i - b), b});
    } else if (c >= '0' && c <= '9') {
      while (i < n && (is_ident_char(m[i]) || m[i] == '.' || m[i] == '\'' ||
                       ((m[i] == '+' || m[i] == '-') && (m[i - 1] == 'e' || m[i - 1] == 'E' ||
                                                         m[i - 1] == 'p' || m[i - 1] == 'P'))))
        ++i;
      toks.push_back({TokKind::Number, m.substr(b, i - b), b});
    } else if (c == '"' || c == '\'') {
      ++i;
      while (i < n && m[i] != c && m[i] != '\n') ++i;
      if (i < n && m[i] == c) ++i;
      toks.push_back({TokKind::Literal, m.substr(b, i - b), b});
    } else if ((c == ':' && i + 1 < n && m[i + 1] == ':') || (c == '-' && i + 1 < n && m[i + 1] == '>')) {
      i += 2;
      toks.push_back({TokKind::Punct, m.substr(b, 2), b});
    } else {
      ++i;
      toks.push_back({TokKind::Punct, m.substr(b, 1), b});
    }
  }
  return toks;
}

enum class HeadKind { Namespace, Extern, Class, Function, Other };

struct HeadInfo {
  HeadKind kind = HeadKind::Other;
  std::string name;
  bool init_list = false;
};

bool is(const Token& t, std::string_view s) { return t.text == s; }

bool call_like_keyword(std::string_view s) {
  static const std::set<std::string_view> kw = {
      "if", "while", "for", "switch", "return", "sizeof", "alignof", "_Alignof", "decltype",
      "__attribute__", "__attribute", "__declspec", "alignas", "_Alignas", "noexcept", "throw",
      "static_assert", "_Static_assert", "__typeof__", "__typeof", "typeof", "__asm__", "asm",
      "__asm", "catch", "defined", "void", "int", "char", "short", "long", "float", "double",
      "signed", "unsigned", "bool", "_Bool", "auto", "const", "volatile", "static", "extern",
      "inline", "struct", "union", "enum", "class", "requires", "co_await", "co_return"};
  return kw.count(s) > 0;
}

std::size_t match_close(const std::vector<Token>& toks, std::size_t open, std::size_t end,
                        std::string_view o, std::string_view c) {
  int depth = 0;
  for (std::size_t k = open; k < end; ++k) {
    if (is(toks[k], o)) ++depth;
    else if (is(toks[k], c) && --depth == 0) return k;
  }
  return end;
}

HeadInfo analyze_head(const std::vector<Token>& toks, std::size_t b, std::size_t e) {
  HeadInfo info;
  while (b + 1 < e && is(toks[b], "template") && is(toks[b + 1], "<")) {
    std::size_t close = match_close(toks, b + 1, e, "<", ">");
    if (close >= e) return info;
    b = close + 1;
  }
  if (b >= e) return info;
  if (is(toks[b], "namespace") || (b + 1 < e && is(toks[b], "inline") && is(toks[b + 1], "namespace"))) {
    info.kind = HeadKind::Namespace;
    return info;
  }
  if (is(toks[b], "extern") && b + 2 == e && toks[b + 1].kind == TokKind::Literal) {
    info.kind = HeadKind::Extern;
    return info;
  }

  int depth = 0;
  for (std::size_t k = b; k < e; ++k) {
    const Token& t = toks[k];
    if (is(t, "(") || is(t, "[")) {
      if (depth == 0 && is(t, "(") && k > b && toks[k - 1].kind == TokKind::Ident &&
          !call_like_keyword(toks[k - 1].text) && !is(toks[k - 1], "operator")) {
        std::size_t name_idx = k - 1;
        std::string name(toks[name_idx].text);
        std::size_t q = name_idx;
        if (q > b && is(toks[q - 1], "~")) {
          name = "~" + name;
          --q;
        }
        while (q >= b + 2 && is(toks[q - 1], "::") && toks[q - 2].kind == TokKind::Ident) {
          name = std::string(toks[q - 2].text) + "::" + name;
          q -= 2;
        }
        std::size_t close = match_close(toks, k, e, "(", ")");
        info.kind = HeadKind::Function;
        info.name = std::move(name);
        for (std::size_t r = close + 1; r < e; ++r) {
          if (is(toks[r], ":")) {
            info.init_list = true;
            break;
          }
        }
        return info;
      }
      ++depth;
      continue;
    }
    if (is(t, ")") || is(t, "]")) {
      if (depth > 0) --depth;
      continue;
    }
    if (depth > 0) continue;
    if (is(t, "=")) return info;  // initializer, not a definition
    if (is(t, "operator")) {
      std::size_t p = k + 1;
      std::string name = "operator";
      if (p + 1 < e && is(toks[p], "(") && is(toks[p + 1], ")")) {
        name += "()";
        p += 2;
      } else {
        while (p < e && !is(toks[p], "(")) {
          if (toks[p].kind == TokKind::Ident) name += ' ';
          name += toks[p].text;
          ++p;
        }
      }
      if (p >= e || !is(toks[p], "(")) return info;
      std::size_t q = k;
      while (q >= b + 2 && is(toks[q - 1], "::") && toks[q - 2].kind == TokKind::Ident) {
        name = std::string(toks[q - 2].text) + "::" + name;
        q -= 2;
      }
      std::size_t close = match_close(toks, p, e, "(", ")");
      info.kind = HeadKind::Function;
      info.name = std::move(name);
      for (std::size_t r = close + 1; r < e; ++r)
        if (is(toks[r], ":")) info.init_list = true;
      return info;
    }
  }
  for (std::size_t k = b; k < e; ++k) {
    if (is(toks[k], "enum")) return info;
  }
  for (std::size_t k = b; k < e; ++k) {
    if (is(toks[k], "class") || is(toks[k], "struct") || is(toks[k], "union")) {
      info.kind = HeadKind::Class;
      return info;
    }
  }
  return info;
}

std::size_t match_brace(const std::vector<Token>& toks, std::size_t open) {
  int depth = 0;
  for (std::size_t k = open; k < toks.size(); ++k) {
    if (is(toks[k], "{")) ++depth;
    else if (is(toks[k], "}") && --depth == 0) return k;
  }
  throw ParseError("unbalanced '{'", toks[open].offset);
}

std::optional<CommentBlock> find_leading_comment(std::string_view content,
                                                 const std::vector<CommentBlock>& blocks,
                                                 std::size_t sig_start) {
  auto it = std::upper_bound(blocks.begin(), blocks.end(), sig_start,
                             [](std::size_t pos, const CommentBlock& b) { return pos < b.span_end; });
  if (it == blocks.begin()) return std::nullopt;
  const CommentBlock& cand = *std::prev(it);
  std::string_view gap = content.substr(cand.span_end, sig_start - cand.span_end);
  if (!trim(gap).empty()) return std::nullopt;
  std::size_t nl = count_newlines(gap);
  if (nl < 1 || nl > 2) return std::nullopt;
  std::size_t p = cand.span_begin;
  while (p > 0 && (content[p - 1] == ' ' || content[p - 1] == '\t')) --p;
  if (p != 0 && content[p - 1] != '\n') return std::nullopt;  // trailing comment of a code line
  return cand;
}

}  // namespace

std::vector<CodeUnit> extract_pairs(const SourceFile& file) {
  const std::string& content = file.content;
  auto segments = lex_segments(content);
  auto blocks = collect_comment_blocks(content, segments);
  std::string masked = mask_comments_and_literals(content);
  auto toks = tokenize_structure(masked);

  std::vector<CodeUnit> units;
  std::vector<std::size_t> scope_offsets;
  std::size_t head_start = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (is(t, ";")) {
      head_start = i + 1;
    } else if (is(t, "}")) {
      if (scope_offsets.empty()) throw ParseError("unbalanced '}'", t.offset);
      scope_offsets.pop_back();
      head_start = i + 1;
    } else if (is(t, ":") && i == head_start + 1 &&
               (is(toks[i - 1], "public") || is(toks[i - 1], "private") || is(toks[i - 1], "protected"))) {
      head_start = i + 1;
    } else if (is(t, "{")) {
      HeadInfo head = analyze_head(toks, head_start, i);
      switch (head.kind) {
        case HeadKind::Namespace:
        case HeadKind::Extern:
        case HeadKind::Class:
          scope_offsets.push_back(t.offset);
          head_start = i + 1;
          break;
        case HeadKind::Function: {
          std::size_t close = match_brace(toks, i);
          if (head.init_list && i > head_start &&
              (toks[i - 1].kind == TokKind::Ident || is(toks[i - 1], ">"))) {
            i = close;  // brace-initialized member in a constructor init list
            break;
          }
          CodeUnit u;
          u.repo_id = file.repo_id;
          u.path = file.path;
          u.language = file.language;
          u.name = head.name;
          u.start_byte = toks[head_start].offset;
          u.body_begin = t.offset;
          u.body_end = toks[close].offset + 1;
          u.signature = collapse_whitespace(
              strip_comments(std::string_view(content).substr(u.start_byte, u.body_begin - u.start_byte)));
          u.code = content.substr(u.start_byte, u.body_end - u.start_byte);
          u.loc = count_newlines(u.code) + 1;
          u.leading_comment = find_leading_comment(content, blocks, u.start_byte);
          u.id = file.repo_id + ":" + file.path + "#" + u.name + "@" + std::to_string(u.start_byte);
          units.push_back(std::move(u));
          i = close;
          head_start = close + 1;
          break;
        }
        case HeadKind::Other:
          i = match_brace(toks, i);
          break;
      }
    }
  }
  if (!scope_offsets.empty()) throw ParseError("unbalanced '{'", scope_offsets.back());
  return units;
}

namespace {

struct IncludeDirective {
  std::size_t line_begin;
  std::size_t line_end;  // includes the newline
  std::string name;
};

std::vector<IncludeDirective> find_quoted_includes(std::string_view content) {
  std::string masked = mask_comments_and_literals(content);
  std::vector<IncludeDirective> out;
  std::size_t pos = 0;
  while (pos < masked.size()) {
    std::size_t nl = masked.find('\n', pos);
    std::size_t end = nl == std::string::npos ? masked.size() : nl + 1;
    std::string_view line = std::string_view(masked).substr(pos, end - pos);
    std::string_view t = trim(line);
    if (!t.empty() && t.front() == '#') {
      std::string_view rest = trim(t.substr(1));
      if (starts_with_word(rest, "include")) {
        rest = trim(rest.substr(7));
        if (!rest.empty() && rest.front() == '"') {
          std::size_t q0 = static_cast<std::size_t>(rest.data() - masked.data());
          std::size_t q1 = content.find('"', q0 + 1);
          if (q1 != std::string_view::npos && q1 < end)
            out.push_back({pos, end, std::string(content.substr(q0 + 1, q1 - q0 - 1))});
        }
      }
    }
    pos = end;
  }
  return out;
}

bool has_include_guard(std::string_view stripped) {
  std::vector<std::pair<std::string, std::string>> directives;
  for (std::string_view line : split_lines(stripped)) {
    std::string_view t = trim(line);
    if (t.empty()) continue;
    if (t.front() != '#') {
      if (directives.empty()) return false;  // code before the first directive
      continue;
    }
    std::string_view rest = trim(t.substr(1));
    std::size_t k = 0;
    while (k < rest.size() && is_ident_char(rest[k])) ++k;
    directives.emplace_back(std::string(rest.substr(0, k)), std::string(trim(rest.substr(k))));
    if (directives.front().first == "pragma" && directives.front().second == "once") return true;
    if (directives.size() == 2) break;
  }
  for (const auto& d : directives)
    if (d.first == "pragma" && d.second == "once") return true;
  if (directives.size() < 2) return false;
  if (directives[0].first != "ifndef" || directives[1].first != "define") return false;
  std::string_view defined = directives[1].second;
  std::size_t k = 0;
  while (k < defined.size() && is_ident_char(defined[k])) ++k;
  return defined.substr(0, k) == directives[0].second;
}

class HeaderExpander {
 public:
  HeaderExpander(const std::vector<fs::path>& search_paths, const ExpandOptions& options,
                 std::vector<std::string>& warnings)
      : search_paths_(search_paths), options_(options), warnings_(warnings) {}

  std::string expand(const std::string& content, const fs::path& dir, std::size_t depth) {
    std::string out;
    std::size_t pos = 0;
    for (const auto& inc : find_quoted_includes(content)) {
      out.append(content, pos, inc.line_begin - pos);
      pos = inc.line_end;
      std::string directive = content.substr(inc.line_begin, inc.line_end - inc.line_begin);
      auto resolved = resolve(inc.name, dir);
      if (!resolved) {
        warnings_.push_back("missing header \"" + inc.name + "\"; directive left in place");
        out += directive;
        continue;
      }
      if (std::find(stack_.begin(), stack_.end(), *resolved) != stack_.end()) {
        out += "// include cycle: \"" + inc.name + "\" is already being expanded\n";
        continue;
      }
      if (guarded_done_.count(*resolved)) {
        out += '\n';
        continue;
      }
      if (depth >= options_.max_depth) {
        warnings_.push_back("include depth limit reached at \"" + inc.name + "\"");
        out += directive;
        continue;
      }
      std::string header;
      try {
        header = strip_comments(read_file(*resolved));
      } catch (const Error& e) {
        warnings_.push_back(std::string("cannot expand \"") + inc.name + "\": " + e.what());
        out += directive;
        continue;
      }
      if (has_include_guard(header)) guarded_done_.insert(*resolved);
      stack_.push_back(*resolved);
      std::string body = expand(header, resolved->parent_path(), depth + 1);
      stack_.pop_back();
      out += body;
      if (!body.empty() && body.back() != '\n') out += '\n';
    }
    out.append(content, pos, std::string::npos);
    return out;
  }

  void enter(const fs::path& p) { stack_.push_back(p); }

 private:
  std::optional<fs::path> resolve(const std::string& name, const fs::path& dir) const {
    std::vector<fs::path> candidates{dir / name};
    for (const auto& sp : search_paths_) candidates.push_back(sp / name);
    for (const auto& c : candidates) {
      std::error_code ec;
      if (fs::is_regular_file(c, ec)) return fs::weakly_canonical(c, ec);
    }
    return std::nullopt;
  }

  const std::vector<fs::path>& search_paths_;
  const ExpandOptions& options_;
  std::vector<std::string>& warnings_;
  std::vector<fs::path> stack_;
  std::set<fs::path> guarded_done_;
};

}  // namespace

Expansion expand_headers(const fs::path& file_path, const std::vector<fs::path>& search_paths,
                         const ExpandOptions& options) {
  Expansion result;
  std::string content = read_file(file_path);
  HeaderExpander expander(search_paths, options, result.warnings);
  std::error_code ec;
  fs::path self = fs::weakly_canonical(file_path, ec);
  expander.enter(self);
  result.text = expander.expand(content, self.parent_path(), 0);
  return result;
}


ordered_json unit_to_json(const CodeUnit& u) {
  ordered_json j;
  j["id"] = u.id;
  j["repo"] = u.repo_id;
  j["path"] = u.path;
  j["signature"] = u.signature;
  j["code"] = u.code;
  j["comment"] = u.leading_comment ? ordered_json(u.leading_comment->text) : ordered_json(nullptr);
  j["loc"] = u.loc;
  j["name"] = u.name;
  j["language"] = to_string(u.language);
  j["start_byte"] = u.start_byte;
  j["body_begin"] = u.body_begin;
  j["body_end"] = u.body_end;
  if (u.leading_comment) {
    const auto& c = *u.leading_comment;
    j["comment_raw"] = c.raw;
    j["comment_style"] = to_string(c.style);
    j["comment_span"] = {c.span_begin, c.span_end};
  }
  return j;
}

CodeUnit unit_from_json(const ordered_json& j) {
  CodeUnit u;
  u.id = j.at("id").get<std::string>();
  u.repo_id = j.at("repo").get<std::string>();
  u.path = j.at("path").get<std::string>();
  u.signature = j.at("signature").get<std::string>();
  u.code = j.at("code").get<std::string>();
  u.loc = j.at("loc").get<std::size_t>();
  u.name = j.value("name", std::string{});
  u.language = j.value("language", std::string("C")) == "CPP" ? Language::CPP : Language::C;
  u.start_byte = j.value("start_byte", std::size_t{0});
  u.body_begin = j.value("body_begin", std::size_t{0});
  u.body_end = j.value("body_end", std::size_t{0});
  if (j.contains("comment") && !j.at("comment").is_null()) {
    CommentBlock c;
    c.text = j.at("comment").get<std::string>();
    c.raw = j.value("comment_raw", c.text);
    c.style = comment_style_from_string(j.value("comment_style", std::string("line")));
    if (j.contains("comment_span")) {
      c.span_begin = j.at("comment_span").at(0).get<std::size_t>();
      c.span_end = j.at("comment_span").at(1).get<std::size_t>();
    }
    u.leading_comment = std::move(c);
  }
  return u;
}


std::size_t export_dataset(std::vector<CodeUnit> units, const fs::path& out) {
  std::sort(units.begin(), units.end(), [](const CodeUnit& a, const CodeUnit& b) {
    return std::tie(a.repo_id, a.path, a.start_byte) < std::tie(b.repo_id, b.path, b.start_byte);
  });
  std::string buf;
  for (const auto& u : units) {
    buf += unit_to_json(u).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    buf += '\n';
  }
  write_file(out, buf);
  return units.size();
}

std::vector<CodeUnit> import_dataset(const fs::path& in) {
  std::vector<CodeUnit> units;
  std::string data = read_file(in);
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(data)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      units.push_back(unit_from_json(ordered_json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(in.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return units;
}

}  // namespace commentgen
