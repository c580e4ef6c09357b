#include "commentgen/astx.hpp"

#include <stdlib.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <functional>
#include <cstdlib>
#include <map>
#include <set>
#include <unordered_map>

#include "commentgen/digest.hpp"
#include "commentgen/subprocess.hpp"
#include "commentgen/text.hpp"

namespace commentgen {
namespace fs = std::filesystem;
using json = nlohmann::json;

std::vector<std::string> BuildFlags::all() const {
  std::vector<std::string> out = cflags;
  out.insert(out.end(), cppflags.begin(), cppflags.end());
  return out;
}

namespace {

std::vector<std::string> safe_tokens(std::string_view value, std::vector<std::string>& warnings) {
  std::vector<std::string> out;
  for (auto& tok : split_shell_words(value)) {
    if (tok.find_first_of(";|&`$<>\n") != std::string::npos) {
      warnings.push_back("dropped flag with shell metacharacters: " + tok);
      continue;
    }
    out.push_back(std::move(tok));
  }
  return out;
}

class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "commentgen-XXXXXX").string();
    if (!mkdtemp(pattern.data())) throw IoError("cannot create temporary directory");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

constexpr std::string_view kCflagsMarker = "__COMMENTGEN_CFLAGS__=";
constexpr std::string_view kCppflagsMarker = "__COMMENTGEN_CPPFLAGS__=";

}  // namespace

BuildFlags override_flags(std::string_view cflags, std::string_view cppflags) {
  BuildFlags f;
  f.source = FlagSource::Override;
  f.cflags = safe_tokens(cflags, f.warnings);
  f.cppflags = safe_tokens(cppflags, f.warnings);
  return f;
}

BuildFlags scrape_flags(std::string_view text) {
  std::map<std::string, std::string, std::less<>> vars;
  std::function<std::string(std::string_view, int)> expand = [&](std::string_view v, int depth) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == '$' && i + 1 < v.size() && (v[i + 1] == '(' || v[i + 1] == '{')) {
        char close = v[i + 1] == '(' ? ')' : '}';
        std::size_t end = v.find(close, i + 2);
        if (end == std::string_view::npos) break;
        std::string name(trim(v.substr(i + 2, end - i - 2)));
        std::string value;
        if (auto it = vars.find(name); it != vars.end()) value = it->second;
        else if (const char* env = std::getenv(name.c_str())) value = env;
        out += depth < 16 ? expand(value, depth + 1) : value;
        i = end;
      } else if (v[i] == '$' && i + 1 < v.size() && v[i + 1] == '$') {
        out += '$';
        ++i;
      } else {
        out += v[i];
      }
    }
    return out;
  };

  std::string logical;
  auto handle = [&](std::string_view line) {
    if (line.empty() || line.front() == '\t') return;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    for (std::string_view prefix : {"export ", "override "})
      if (line.substr(0, prefix.size()) == prefix) line = trim(line.substr(prefix.size()));
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos || eq == 0) return;
    std::string_view op = "=";
    std::size_t name_end = eq;
    if (eq >= 2 && line.substr(eq - 2, 2) == "::") {
      op = "::=";
      name_end = eq - 2;
    } else if (line[eq - 1] == ':' || line[eq - 1] == '+' || line[eq - 1] == '?') {
      op = line.substr(eq - 1, 2);
      name_end = eq - 1;
    }
    std::string name(trim(line.substr(0, name_end)));
    if (name.empty() || name.find_first_of(" \t:") != std::string::npos) return;
    std::string_view value = trim(line.substr(eq + 1));
    if (op == ":=" || op == "::=") {
      vars[name] = expand(value, 0);
    } else if (op == "+=") {
      auto& cur = vars[name];
      cur = cur.empty() ? std::string(value) : cur + " " + std::string(value);
    } else if (op == "?=") {
      if (!vars.count(name) && !std::getenv(name.c_str())) vars[name] = std::string(value);
    } else {
      vars[name] = std::string(value);
    }
  };
  for (std::string_view line : split_lines(text)) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.back() == '\\') {
      logical += line.substr(0, line.size() - 1);
      logical += ' ';
      continue;
    }
    logical += line;
    handle(logical);
    logical.clear();
  }
  if (!logical.empty()) handle(logical);

  BuildFlags f;
  f.source = FlagSource::Makefile;
  auto value_of = [&](const char* name) {
    if (auto it = vars.find(name); it != vars.end()) return expand(it->second, 0);
    if (const char* env = std::getenv(name)) return std::string(env);
    return std::string();
  };
  f.cflags = safe_tokens(value_of("CFLAGS"), f.warnings);
  f.cppflags = safe_tokens(value_of("CPPFLAGS"), f.warnings);
  return f;
}

BuildFlags recover_flags(const fs::path& makefile, const RecoverOptions& options) {
  std::error_code ec;
  if (!fs::is_regular_file(makefile, ec)) {
    BuildFlags f;
    f.source = FlagSource::Override;
    f.warnings.push_back("no makefile at " + makefile.string() + "; using empty flags");
    return f;
  }
  fs::path abs = fs::absolute(makefile).lexically_normal();
  std::vector<std::string> fallback_reasons;
  try {
    TempDir tmp;
    fs::path wrapper = tmp.path() / "print-flags.mk";
    std::string mk = "include " + abs.string() +
                     "\n.PHONY: __commentgen_print_flags\n__commentgen_print_flags:\n\t@:$(info " +
                     std::string(kCflagsMarker) + "$(CFLAGS))$(info " + std::string(kCppflagsMarker) +
                     "$(CPPFLAGS))\n";
    write_file(wrapper, mk);
    auto res = run_process({options.make_program, "-n", "-s", "--no-print-directory", "-C",
                            abs.parent_path().string(), "-f", wrapper.string(),
                            "__commentgen_print_flags"});
    std::optional<std::string> cflags, cppflags;
    for (std::string_view line : split_lines(res.out)) {
      if (line.substr(0, kCflagsMarker.size()) == kCflagsMarker) cflags = std::string(line.substr(kCflagsMarker.size()));
      if (line.substr(0, kCppflagsMarker.size()) == kCppflagsMarker)
        cppflags = std::string(line.substr(kCppflagsMarker.size()));
    }
    if (res.exit_code == 0 && cflags && cppflags) {
      BuildFlags f;
      f.source = FlagSource::Makefile;
      f.cflags = safe_tokens(*cflags, f.warnings);
      f.cppflags = safe_tokens(*cppflags, f.warnings);
      return f;
    }
    fallback_reasons.push_back("make exited with " + std::to_string(res.exit_code) + ": " +
                               std::string(trim(res.err)));
  } catch (const Error& e) {
    fallback_reasons.push_back(e.what());
  }
  BuildFlags f = scrape_flags(read_file(makefile));
  for (auto& r : fallback_reasons) f.warnings.push_back("flag recovery fell back to static scraping: " + r);
  return f;
}

namespace {

bool looks_like_pointer_id(const std::string& s) {
  if (s.size() < 3 || s[0] != '0' || s[1] != 'x') return false;
  return std::all_of(s.begin() + 2, s.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

void normalize_ids(json& node, std::unordered_map<std::string, std::string>& ids) {
  if (node.is_object()) {
    // ids, previousDecl, referencedMemberDecl, ... all carry addresses
    for (auto it = node.begin(); it != node.end(); ++it) {
      if (it->is_string()) {
        std::string v = it->get<std::string>();
        if (looks_like_pointer_id(v)) {
          auto [pos, inserted] = ids.try_emplace(v, "n" + std::to_string(ids.size()));
          *it = pos->second;
        }
      } else {
        normalize_ids(*it, ids);
      }
    }
  } else if (node.is_array()) {
    for (auto& child : node) normalize_ids(child, ids);
  }
}

}  // namespace

AstDocument parse_ast_dump(std::string_view raw) {
  AstDocument doc;
  try {
    doc.root = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed AST dump: ") + e.what(), e.byte);
  }
  std::unordered_map<std::string, std::string> ids;
  normalize_ids(doc.root, ids);
  doc.text = doc.root.dump();
  return doc;
}

AstDocument dump_ast(const fs::path& file, const BuildFlags& flags, const AstToolConfig& config) {
  std::vector<std::string> argv;
  for (auto& word : split_shell_words(config.tool_template)) {
    if (word == "{flags}") {
      auto all = flags.all();
      argv.insert(argv.end(), all.begin(), all.end());
      continue;
    }
    std::string w = word;
    for (std::size_t p = w.find("{file}"); p != std::string::npos; p = w.find("{file}", p))
      w.replace(p, 6, file.string());
    std::string joined;
    for (const auto& fl : flags.all()) joined += (joined.empty() ? "" : " ") + fl;
    for (std::size_t p = w.find("{flags}"); p != std::string::npos; p = w.find("{flags}", p))
      w.replace(p, 7, joined);
    argv.push_back(std::move(w));
  }
  if (argv.empty()) throw ConfigError("empty AST tool template");

  std::optional<fs::path> cache_file;
  if (config.cache_dir) {
    std::string key_material = config.tool_template;
    for (const auto& a : flags.all()) key_material += '\0' + a;
    cache_file = *config.cache_dir /
                 (sha256_hex(read_file(file)).substr(0, 32) + "-" + sha256_hex(key_material).substr(0, 32) + ".json");
    std::error_code ec;
    if (fs::is_regular_file(*cache_file, ec)) return parse_ast_dump(read_file(*cache_file));
  }

  auto res = run_process(argv, config.working_dir);
  if (res.exit_code != 0)
    throw AstToolError("AST tool exited with status " + std::to_string(res.exit_code) + " for " + file.string(),
                       res.err);
  AstDocument doc = parse_ast_dump(res.out);
  if (cache_file) write_file(*cache_file, doc.text);
  return doc;
}

std::string_view to_string(AstNodeKind kind) {
  switch (kind) {
    case AstNodeKind::Function: return "function";
    case AstNodeKind::Parameter: return "parameter";
    case AstNodeKind::Compound: return "compound";
    case AstNodeKind::Call: return "call";
    case AstNodeKind::If: return "if";
    case AstNodeKind::Loop: return "loop";
    case AstNodeKind::Return: return "return";
    case AstNodeKind::Declaration: return "declaration";
    case AstNodeKind::Record: return "record";
    case AstNodeKind::Field: return "field";
    case AstNodeKind::Enum: return "enum";
    case AstNodeKind::Enumerator: return "enumerator";
  }
  return "function";
}

AstNodeKind ast_node_kind_from_string(std::string_view s) {
  static const std::map<std::string_view, AstNodeKind> kinds = {
      {"function", AstNodeKind::Function}, {"parameter", AstNodeKind::Parameter},
      {"compound", AstNodeKind::Compound}, {"call", AstNodeKind::Call},
      {"if", AstNodeKind::If},             {"loop", AstNodeKind::Loop},
      {"return", AstNodeKind::Return},     {"declaration", AstNodeKind::Declaration},
      {"record", AstNodeKind::Record},     {"field", AstNodeKind::Field},
      {"enum", AstNodeKind::Enum},         {"enumerator", AstNodeKind::Enumerator}};
  auto it = kinds.find(s);
  if (it == kinds.end()) throw ParseError("unknown AST node kind '" + std::string(s) + "'", 0);
  return it->second;
}

namespace {

const std::set<std::string_view> kFunctionKinds = {"FunctionDecl", "CXXMethodDecl", "CXXConstructorDecl",
                                                   "CXXDestructorDecl", "CXXConversionDecl"};
const std::set<std::string_view> kContainerKinds = {"TranslationUnitDecl", "NamespaceDecl",  "CXXRecordDecl",
                                                    "LinkageSpecDecl",     "FunctionTemplateDecl",
                                                    "ClassTemplateDecl",   "ExternCContextDecl"};
const std::set<std::string_view> kLiteralKinds = {"IntegerLiteral", "StringLiteral", "FloatingLiteral",
                                                  "CharacterLiteral", "CXXBoolLiteralExpr", "FixedPointLiteral"};

std::string str_field(const json& node, const char* key) {
  auto it = node.find(key);
  return it != node.end() && it->is_string() ? it->get<std::string>() : std::string();
}

std::string kind_of(const json& n) { return str_field(n, "kind"); }

std::string qual_type(const json& n) {
  auto it = n.find("type");
  if (it == n.end() || !it->is_object()) return {};
  return str_field(*it, "qualType");
}

const json* inner_of(const json& n) {
  auto it = n.find("inner");
  return it != n.end() && it->is_array() ? &*it : nullptr;
}

bool is_implicit(const json& n) {
  auto it = n.find("isImplicit");
  return it != n.end() && it->is_boolean() && it->get<bool>();
}

bool has_body(const json& fn) {
  if (const json* in = inner_of(fn))
    for (const auto& c : *in)
      if (kind_of(c) == "CompoundStmt") return true;
  return false;
}

std::size_t body_offset(const json& fn) {
  if (const json* in = inner_of(fn))
    for (const auto& c : *in)
      if (kind_of(c) == "CompoundStmt") {
        auto r = c.find("range");
        if (r != c.end() && r->contains("begin") && (*r)["begin"].contains("offset"))
          return (*r)["begin"]["offset"].get<std::size_t>();
      }
  return static_cast<std::size_t>(-1);
}

struct TuIndex {
  std::unordered_map<std::string, const json*> by_id;
  std::multimap<std::string, const json*> functions;
  std::map<std::string, const json*> records;
  std::map<std::string, const json*> enums;
  std::map<std::string, const json*> typedefs;

  void build(const json& n) {
    if (!n.is_object()) return;
    std::string id = str_field(n, "id");
    std::string kind = kind_of(n);
    std::string name = str_field(n, "name");
    if (!id.empty()) by_id.emplace(id, &n);
    if (!name.empty()) {
      if (kFunctionKinds.count(kind)) functions.emplace(name, &n);
      if ((kind == "RecordDecl" || kind == "CXXRecordDecl") && inner_of(n) && !is_implicit(n))
        records.emplace(name, &n);
      if (kind == "EnumDecl" && inner_of(n)) enums.emplace(name, &n);
      if (kind == "TypedefDecl" || kind == "TypeAliasDecl") typedefs.emplace(name, &n);
    }
    if (const json* in = inner_of(n))
      for (const auto& c : *in) build(c);
  }
};

void find_functions(const json& n, const std::string& name, std::vector<const json*>& out) {
  if (!n.is_object()) return;
  std::string kind = kind_of(n);
  if (kFunctionKinds.count(kind) && str_field(n, "name") == name && !is_implicit(n)) out.push_back(&n);
  if (kContainerKinds.count(kind) || kind.empty())
    if (const json* in = inner_of(n))
      for (const auto& c : *in) find_functions(c, name, out);
}

std::string truncate_literal(std::string s) {
  if (s.size() > 16) s.resize(16);
  return s;
}

// First literal reachable through implicit casts / parens.
std::string literal_value(const json& n) {
  const json* cur = &n;
  for (int guard = 0; guard < 8 && cur; ++guard) {
    std::string kind = kind_of(*cur);
    if (kLiteralKinds.count(kind)) {
      auto v = cur->find("value");
      if (v == cur->end()) return {};
      return truncate_literal(v->is_string() ? v->get<std::string>() : v->dump());
    }
    if (kind != "ImplicitCastExpr" && kind != "ParenExpr" && kind != "CStyleCastExpr" && kind != "ExprWithCleanups")
      return {};
    const json* in = inner_of(*cur);
    cur = in && !in->empty() ? &(*in)[0] : nullptr;
  }
  return {};
}

// Name and declaration id of the function a call expression targets.
std::pair<std::string, std::string> callee_of(const json& call) {
  const json* in = inner_of(call);
  if (!in || in->empty()) return {};
  std::vector<const json*> stack{&(*in)[0]};
  while (!stack.empty()) {
    const json* n = stack.back();
    stack.pop_back();
    std::string kind = kind_of(*n);
    if (kind == "DeclRefExpr") {
      auto r = n->find("referencedDecl");
      if (r != n->end() && kFunctionKinds.count(str_field(*r, "kind")))
        return {str_field(*r, "name"), str_field(*r, "id")};
      return {};
    }
    if (kind == "MemberExpr") return {str_field(*n, "name"), str_field(*n, "referencedMemberDecl")};
    if (const json* ci = inner_of(*n))
      for (auto it = ci->rbegin(); it != ci->rend(); ++it) stack.push_back(&*it);
  }
  return {};
}

class Condenser {
 public:
  Condenser(const TuIndex& index, std::vector<AstNode>& out) : index_(index), out_(out) {}

  void own_subtree(const json& fn) {
    AstNode root;
    root.kind = AstNodeKind::Function;
    root.name = str_field(fn, "name");
    root.type_text = qual_type(fn);
    root.origin = str_field(fn, "id");
    note_type(root.type_text);
    out_.push_back(std::move(root));
    if (const json* in = inner_of(fn))
      for (const auto& c : *in) walk(c, 0);
  }

  void callee_signatures() {
    for (const auto& [name, decl_id] : callee_list_) {
      const json* decl = nullptr;
      if (auto it = index_.by_id.find(decl_id); it != index_.by_id.end()) decl = it->second;
      if (!decl) {
        auto range = index_.functions.equal_range(name);
        if (range.first != range.second) decl = range.first->second;
      }
      AstNode n;
      n.kind = AstNodeKind::Function;
      n.name = name;
      n.type_text = decl ? qual_type(*decl) : std::string();
      n.parent = 0;
      n.depth = 1;
      n.origin = "callee:" + (decl ? str_field(*decl, "id") : name);
      out_.push_back(std::move(n));
    }
  }

  void referenced_types() {
    std::set<const json*> emitted;
    for (std::size_t i = 0; i < type_names_.size(); ++i) {
      const json* decl = resolve_type(type_names_[i], 0);
      if (!decl || !emitted.insert(decl).second) continue;
      bool is_enum = kind_of(*decl) == "EnumDecl";
      AstNode rec;
      rec.kind = is_enum ? AstNodeKind::Enum : AstNodeKind::Record;
      rec.name = str_field(*decl, "name");
      if (rec.name.empty()) rec.name = type_names_[i];  // anonymous record reached through a typedef
      rec.parent = 0;
      rec.depth = 1;
      rec.origin = "type:" + str_field(*decl, "id");
      std::size_t rec_index = out_.size();
      out_.push_back(std::move(rec));
      if (const json* in = inner_of(*decl)) {
        for (const auto& c : *in) {
          std::string kind = kind_of(c);
          if (kind != "FieldDecl" && kind != "EnumConstantDecl") continue;
          if (is_implicit(c)) continue;
          AstNode f;
          f.kind = is_enum ? AstNodeKind::Enumerator : AstNodeKind::Field;
          f.name = str_field(c, "name");
          f.parent = rec_index;
          f.depth = 2;
          f.origin = "type:" + str_field(c, "id");
          out_.push_back(std::move(f));
        }
      }
    }
  }

  std::vector<std::string> callee_names() const {
    std::vector<std::string> names;
    for (const auto& c : callee_list_) names.push_back(c.first);
    return names;
  }

 private:
  void note_type(const std::string& qt) {
    std::size_t i = 0;
    while (i < qt.size()) {
      if (is_ident_start(qt[i])) {
        std::size_t b = i;
        while (i < qt.size() && is_ident_char(qt[i])) ++i;
        std::string id = qt.substr(b, i - b);
        if (std::find(type_names_.begin(), type_names_.end(), id) == type_names_.end()) type_names_.push_back(id);
      } else {
        ++i;
      }
    }
  }

  const json* resolve_type(const std::string& name, int depth) const {
    if (depth > 4) return nullptr;
    if (auto it = index_.records.find(name); it != index_.records.end()) return it->second;
    if (auto it = index_.enums.find(name); it != index_.enums.end()) return it->second;
    auto td = index_.typedefs.find(name);
    if (td == index_.typedefs.end()) return nullptr;
    // a typedef points at its record through a nested {"decl": {"id": ...}}
    std::vector<const json*> stack{td->second};
    while (!stack.empty()) {
      const json* n = stack.back();
      stack.pop_back();
      if (n->is_object()) {
        if (auto d = n->find("decl"); d != n->end() && d->is_object()) {
          if (auto hit = index_.by_id.find(str_field(*d, "id")); hit != index_.by_id.end()) {
            std::string k = kind_of(*hit->second);
            if (k == "RecordDecl" || k == "CXXRecordDecl" || k == "EnumDecl") {
              if (inner_of(*hit->second)) return hit->second;
              std::string nm = str_field(*hit->second, "name");
              if (!nm.empty() && nm != name) return resolve_type(nm, depth + 1);
            }
          }
        }
        for (auto it = n->begin(); it != n->end(); ++it)
          if (it->is_structured()) stack.push_back(&*it);
      } else if (n->is_array()) {
        for (const auto& c : *n) stack.push_back(&c);
      }
    }
    std::string underlying = qual_type(*td->second);
    for (const char* kw : {"struct ", "union ", "enum ", "class "})
      if (underlying.rfind(kw, 0) == 0) return resolve_type(underlying.substr(std::string(kw).size()), depth + 1);
    return nullptr;
  }

  void walk(const json& n, std::size_t parent) {
    if (!n.is_object() || is_implicit(n)) return;
    std::string kind = kind_of(n);
    std::optional<AstNodeKind> kept;
    if (kind == "ParmVarDecl") kept = AstNodeKind::Parameter;
    else if (kind == "CompoundStmt") kept = AstNodeKind::Compound;
    else if (kind == "CallExpr" || kind == "CXXMemberCallExpr") kept = AstNodeKind::Call;
    else if (kind == "IfStmt") kept = AstNodeKind::If;
    else if (kind == "ForStmt" || kind == "WhileStmt" || kind == "DoStmt" || kind == "CXXForRangeStmt")
      kept = AstNodeKind::Loop;
    else if (kind == "ReturnStmt") kept = AstNodeKind::Return;
    else if (kind == "VarDecl") kept = AstNodeKind::Declaration;

    std::size_t next_parent = parent;
    if (kept) {
      AstNode node;
      node.kind = *kept;
      node.parent = parent;
      node.depth = out_[parent].depth + 1;
      node.origin = str_field(n, "id");
      const json* in = inner_of(n);
      switch (*kept) {
        case AstNodeKind::Parameter:
        case AstNodeKind::Declaration:
          node.name = str_field(n, "name");
          node.type_text = qual_type(n);
          note_type(node.type_text);
          if (*kept == AstNodeKind::Declaration && in && !in->empty()) node.value = literal_value((*in)[0]);
          break;
        case AstNodeKind::Call: {
          auto [name, id] = callee_of(n);
          node.name = name;
          if (!name.empty() &&
              std::none_of(callee_list_.begin(), callee_list_.end(), [&](const auto& c) { return c.first == name; }))
            callee_list_.emplace_back(name, id);
          break;
        }
        case AstNodeKind::Return:
          if (in && !in->empty()) node.value = literal_value((*in)[0]);
          break;
        default:
          break;
      }
      next_parent = out_.size();
      out_.push_back(std::move(node));
    }
    if (kind == "DeclRefExpr" || kind == "MemberExpr") note_type(qual_type(n));
    if (const json* in = inner_of(n))
      for (const auto& c : *in) walk(c, next_parent);
  }

  const TuIndex& index_;
  std::vector<AstNode>& out_;
  std::vector<std::pair<std::string, std::string>> callee_list_;
  std::vector<std::string> type_names_;
};

std::string render_node(const AstNode& n) {
  std::string line(n.depth * 2, ' ');
  line += to_string(n.kind);
  if (!n.name.empty()) line += " " + n.name;
  if (!n.type_text.empty()) line += " : " + n.type_text;
  if (!n.value.empty()) line += " = " + n.value;
  line += '\n';
  return line;
}

void relink(CondensedAst& ast) {
  for (auto& n : ast.nodes) n.children.clear();
  for (std::size_t i = 0; i < ast.nodes.size(); ++i)
    if (ast.nodes[i].parent) ast.nodes[*ast.nodes[i].parent].children.push_back(i);
  ast.token_estimate = estimate_tokens(render_condensed(ast).size());
}

}  // namespace

std::string render_condensed(const CondensedAst& ast) {
  std::string out;
  for (const auto& n : ast.nodes) out += render_node(n);
  return out;
}

CondensedAst take_prefix(const CondensedAst& ast, std::size_t count) {
  CondensedAst out = ast;
  if (!out.nodes.empty()) count = std::max<std::size_t>(count, 1);
  if (count < out.nodes.size()) out.nodes.resize(count);
  relink(out);
  return out;
}

CondensedAst truncate_condensed(const CondensedAst& ast, std::size_t budget) {
  const std::size_t char_budget = budget * 4;
  std::size_t chars = 0;
  std::size_t keep = 0;
  for (const auto& n : ast.nodes) {
    std::size_t cost = render_node(n).size();
    if (keep > 0 && chars + cost > char_budget) break;
    chars += cost;
    ++keep;
  }
  return take_prefix(ast, keep);
}

CondensedAst condense(const AstDocument& doc, const CodeUnit& unit, std::size_t budget) {
  std::string short_name = unit.name;
  if (auto p = short_name.rfind("::"); p != std::string::npos) short_name = short_name.substr(p + 2);

  std::vector<const json*> matches;
  find_functions(doc.root, short_name, matches);
  const json* fn = nullptr;
  for (const json* m : matches)
    if (has_body(*m) && body_offset(*m) == unit.body_begin) fn = m;
  if (!fn)
    for (const json* m : matches)
      if (has_body(*m)) {
        fn = m;
        break;
      }
  if (!fn && !matches.empty()) fn = matches.front();
  if (!fn) throw Error("unit '" + unit.name + "' not found in AST dump (unit/TU mismatch)");

  TuIndex index;
  index.build(doc.root);
  CondensedAst full;
  full.unit_id = unit.id;
  Condenser c(index, full.nodes);
  c.own_subtree(*fn);
  c.callee_signatures();
  c.referenced_types();
  full.callees = c.callee_names();
  return truncate_condensed(full, budget);
}

nlohmann::json to_json(const CondensedAst& ast) {
  json nodes = json::array();
  for (const auto& n : ast.nodes) {
    json j;
    j["kind"] = to_string(n.kind);
    if (!n.name.empty()) j["name"] = n.name;
    if (!n.type_text.empty()) j["type"] = n.type_text;
    if (!n.value.empty()) j["value"] = n.value;
    j["parent"] = n.parent ? json(*n.parent) : json(nullptr);
    j["children"] = n.children;
    j["depth"] = n.depth;
    j["origin"] = n.origin;
    nodes.push_back(std::move(j));
  }
  return {{"unit_id", ast.unit_id}, {"callees", ast.callees}, {"token_estimate", ast.token_estimate},
          {"nodes", std::move(nodes)}};
}

CondensedAst condensed_from_json(const nlohmann::json& j) {
  CondensedAst ast;
  ast.unit_id = j.at("unit_id").get<std::string>();
  ast.callees = j.value("callees", std::vector<std::string>{});
  for (const auto& nj : j.at("nodes")) {
    AstNode n;
    n.kind = ast_node_kind_from_string(nj.at("kind").get<std::string>());
    n.name = nj.value("name", std::string{});
    n.type_text = nj.value("type", std::string{});
    n.value = nj.value("value", std::string{});
    if (nj.contains("parent") && !nj.at("parent").is_null()) n.parent = nj.at("parent").get<std::size_t>();
    n.children = nj.value("children", std::vector<std::size_t>{});
    n.depth = nj.value("depth", std::size_t{0});
    n.origin = nj.value("origin", std::string{});
    ast.nodes.push_back(std::move(n));
  }
  ast.token_estimate = j.value("token_estimate", estimate_tokens(render_condensed(ast).size()));
  return ast;
}

}  // namespace commentgen
