#include "commentgen/classify.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <regex>
#include <set>

#include "commentgen/error.hpp"
#include "commentgen/lexer.hpp"
#include "commentgen/llmclient.hpp"
#include "commentgen/text.hpp"
#include "commentgen/tokenize.hpp"

namespace commentgen {

std::string_view to_string(Category c) {
  switch (c) {
    case Category::Consistency: return "Consistency";
    case Category::Irrelevance: return "Irrelevance";
    case Category::DomainMapping: return "DomainMapping";
    case Category::PossibleExceptions: return "PossibleExceptions";
    case Category::AlternativeSolutions: return "AlternativeSolutions";
    case Category::Links: return "Links";
    case Category::AlgorithmicDetails: return "AlgorithmicDetails";
    case Category::Complexity: return "Complexity";
  }
  return "Consistency";
}

Category category_from_string(std::string_view s) {
  std::string want = to_lower(s);
  want.erase(std::remove_if(want.begin(), want.end(), [](char c) { return c == ' ' || c == '_' || c == '-'; }),
             want.end());
  for (Category c : kAllCategories)
    if (to_lower(to_string(c)) == want) return c;
  throw ParseError("unknown comment category '" + std::string(s) + "'", 0);
}

double reference_useful_percent(Category c) {
  switch (c) {
    case Category::Consistency: return 73.26;
    case Category::Irrelevance: return 10.26;
    case Category::DomainMapping: return 35.31;
    case Category::PossibleExceptions: return 30.66;
    case Category::AlternativeSolutions: return 9.14;
    case Category::Links: return 36.88;
    case Category::AlgorithmicDetails: return 65.56;
    case Category::Complexity: return 8.19;
  }
  return 0.0;
}

std::string_view to_string(CommentSource s) { return s == CommentSource::Original ? "original" : "generated"; }
std::string_view to_string(ClassifyMethod m) { return m == ClassifyMethod::Rules ? "rules" : "judge"; }

ClassifyMethod classify_method_from_string(std::string_view s) {
  if (s == "rules") return ClassifyMethod::Rules;
  if (s == "judge") return ClassifyMethod::Judge;
  throw ConfigError("unknown classification method '" + std::string(s) + "' (expected rules or judge)");
}

bool CategoryLabel::has(Category c) const { return std::binary_search(categories.begin(), categories.end(), c); }

namespace {

using WordSet = std::set<std::string, std::less<>>;

const WordSet& stopwords() {
  static const WordSet s = {
      "the", "and", "for", "with", "this", "that", "these", "those", "from", "into", "onto", "are", "was", "were",
      "has", "have", "had", "its", "it's", "not", "but", "can", "will", "would", "should", "may", "might", "must",
      "when", "then", "than", "there", "their", "which", "what", "where", "while", "who", "whom", "all", "any",
      "each", "every", "some", "such", "only", "also", "very", "just", "more", "most", "less", "per", "via", "using",
      "use", "used", "uses", "our", "your", "you", "they", "them", "his", "her", "one", "two", "out", "off", "about",
      "over", "under", "after", "before", "does", "done", "did", "being", "been", "both", "either", "neither", "how",
      "why", "here", "same", "other", "another", "own", "yet", "still", "properly", "already", "always", "never"};
  return s;
}

// Words that restate the signature rather than add information.
const WordSet& neutral_words() {
  static const WordSet s = {"return", "returns", "returned", "get", "gets", "set", "sets", "function", "method",
                            "routine", "needed", "given", "specified", "provided", "passed", "call", "calls",
                            "called", "takes", "take", "argument", "arguments", "parameter", "parameters", "value",
                            "values", "result", "helper", "simply", "just"};
  return s;
}

// Ordinary programming vocabulary; anything else is a candidate domain term.
const WordSet& generic_words() {
  static const WordSet s = {
      "add", "adds", "added", "address", "algorithm", "alloc", "allocate", "allocates", "allocation", "allocated",
      "alternative", "append", "appends", "array", "arrays", "assert", "assign", "assume", "assumes", "available",
      "base", "begin", "beginning", "bit", "bits", "block", "blocks", "bool", "boolean", "bound", "bounds", "buffer",
      "buffers", "byte", "bytes", "cache", "calloc", "callback", "caller", "case", "cases", "change", "changes",
      "changed", "char", "character", "characters", "check", "checks", "checking", "class", "clean", "cleanup",
      "clear", "clears", "close", "closes", "code", "compare", "compares", "comparison", "compute", "computes",
      "condition", "config", "configuration", "const", "constant", "construct", "constructor", "contains", "content",
      "contents", "context", "convert", "converts", "copy", "copies", "count", "counts", "counter", "create",
      "creates", "created", "current", "data", "debug", "declared", "default", "defined", "define", "delete",
      "deletes", "destroy", "destroys", "direct", "directly", "done", "double", "dump", "dynamic", "element",
      "elements", "empty", "enable", "enabled", "end", "ensure", "ensures", "entry", "entries", "enum", "equal",
      "error", "errors", "escape", "escaped", "event", "events", "example", "exception", "exceptions", "exist",
      "exists", "exit", "expected", "false", "field", "fields", "file", "files", "fill", "find", "finds", "first",
      "flag", "flags", "float", "flush", "flushes", "format", "free", "frees", "full", "global", "handle", "handler",
      "handles", "hash", "head", "header", "heap", "implementation", "include", "index", "indices", "init",
      "initial", "initialization", "initialize", "initializes", "initialized", "input", "insert", "inserts",
      "instance", "int", "integer", "internal", "invalid", "item", "items", "iterate", "iterates", "json", "key",
      "keys", "last", "left", "len", "length", "level", "library", "line", "lines", "list", "lists", "load", "loads",
      "local", "lock", "locks", "log", "logic", "long", "lookup", "loop", "loops", "main", "malloc", "map", "max",
      "maximum", "memcpy", "memory", "memset", "message", "min", "minimum", "mode", "modify", "module", "move",
      "name", "names", "need", "needs", "new", "next", "node", "nodes", "null", "num", "number", "numbers",
      "object", "objects", "offset", "old", "open", "opens", "operation", "option", "options", "order", "output",
      "parse", "parses", "parser", "path", "pointer", "pointers", "pop", "position", "previous", "print", "prints",
      "process", "processes", "processing", "program", "push", "queue", "read", "reads", "realloc", "record",
      "reference", "release", "remove", "removes", "replace", "request", "reset", "resize", "resource", "response",
      "right", "root", "run", "runs", "running", "safe", "save", "scan", "search", "second", "size", "sizes",
      "sort", "sorted", "source", "space", "stack", "standard", "standards", "start", "starts", "state", "static",
      "status", "step", "store", "stores", "stream", "string", "strings", "struct", "structure", "success",
      "support", "swap", "system", "table", "tail", "target", "task", "temp", "temporary", "test", "tests",
      "testing", "text", "thread", "threads", "time", "timeout", "true", "type", "types", "uint", "unsigned",
      "update", "updates", "user", "valid", "validate", "variable", "vector", "version", "void", "wait", "write",
      "writes", "written", "zero", "instead", "could", "better", "faster", "slower", "simple", "whether",
      "otherwise", "because", "since", "note", "like", "make", "makes", "way", "work", "works", "want", "help"};
  return s;
}

const WordSet& abbreviations_for(std::string_view part) {
  static const std::map<std::string, WordSet, std::less<>> table = {
      {"num", {"number", "numbers"}},       {"addr", {"address"}},
      {"len", {"length"}},                  {"buf", {"buffer"}},
      {"ptr", {"pointer"}},                 {"str", {"string"}},
      {"idx", {"index"}},                   {"cnt", {"count"}},
      {"init", {"initialize", "initialization", "initial"}},
      {"alloc", {"allocate", "allocation"}}, {"msg", {"message"}},
      {"err", {"error"}},                   {"cfg", {"configuration", "config"}},
      {"ctx", {"context"}},                 {"pos", {"position"}},
      {"prev", {"previous"}},               {"cur", {"current"}},
      {"tmp", {"temporary"}},               {"val", {"value"}},
      {"calc", {"calculate", "compute"}},   {"max", {"maximum"}},
      {"min", {"minimum"}},                 {"proc", {"process"}},
      {"src", {"source"}},                  {"dst", {"destination"}},
      {"dest", {"destination"}},            {"req", {"request"}},
      {"res", {"result", "response"}},      {"arr", {"array"}},
      {"elem", {"element"}},                {"mem", {"memory"}},
      {"sz", {"size"}},                     {"fn", {"function"}},
      {"cmp", {"compare", "comparison"}},   {"del", {"delete"}},
      {"dir", {"directory"}},               {"lst", {"list"}}};
  static const WordSet none;
  auto it = table.find(part);
  return it == table.end() ? none : it->second;
}

const WordSet& c_keywords() {
  static const WordSet s = {"if", "else", "for", "while", "do", "switch", "case", "default", "break", "continue",
                            "return", "goto", "sizeof", "int", "char", "void", "long", "short", "unsigned", "signed",
                            "float", "double", "const", "static", "struct", "union", "enum", "typedef", "volatile",
                            "auto", "bool", "true", "false", "nullptr", "inline", "extern", "register", "class",
                            "public", "private", "protected", "template", "typename", "namespace", "virtual"};
  return s;
}

WordSet code_vocabulary(std::string_view code) {
  WordSet vocab;
  std::string masked;
  try {
    masked = mask_comments_and_literals(code);
  } catch (const ParseError&) {
    masked = std::string(code);
  }
  std::size_t i = 0;
  while (i < masked.size()) {
    if (!is_ident_start(masked[i])) {
      ++i;
      continue;
    }
    std::size_t b = i;
    while (i < masked.size() && is_ident_char(masked[i])) ++i;
    std::string id = masked.substr(b, i - b);
    if (c_keywords().count(id)) continue;
    vocab.insert(to_lower(id));
    for (const auto& part : identifier_parts(id)) {
      vocab.insert(part);
      for (const auto& full : abbreviations_for(part)) vocab.insert(full);
    }
  }
  return vocab;
}

std::vector<std::string> word_variants(const std::string& w) {
  std::vector<std::string> v = {w};
  auto strip = [&](std::string_view suffix) {
    if (w.size() > suffix.size() + 2 && w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0)
      v.push_back(w.substr(0, w.size() - suffix.size()));
  };
  strip("s");
  strip("es");
  strip("ing");
  strip("ed");
  return v;
}

bool in_vocab(const WordSet& vocab, const std::string& w) {
  for (const auto& v : word_variants(w))
    if (vocab.count(v)) return true;
  return false;
}

struct CommentWords {
  std::vector<std::string> all;         // every lowercase word
  std::vector<std::string> content;     // minus stopwords, neutral words and short words
  std::vector<std::string> identifiers; // code-looking tokens: snake_case, camelCase, a::b, f()
};

CommentWords comment_words(std::string_view comment) {
  CommentWords out;
  std::size_t i = 0;
  while (i < comment.size()) {
    if (!is_ident_char(comment[i])) {
      ++i;
      continue;
    }
    std::size_t b = i;
    while (i < comment.size() &&
           (is_ident_char(comment[i]) ||
            (comment[i] == ':' && i + 2 < comment.size() && comment[i + 1] == ':' && is_ident_start(comment[i + 2])))) {
      i += comment[i] == ':' ? 2 : 1;
    }
    std::string raw(comment.substr(b, i - b));
    bool call = i + 1 < comment.size() && comment[i] == '(' && comment[i + 1] == ')';
    bool camel = false;
    for (std::size_t k = 1; k < raw.size(); ++k)
      if (std::islower(static_cast<unsigned char>(raw[k - 1])) && std::isupper(static_cast<unsigned char>(raw[k])))
        camel = true;
    bool code_like = raw.find('_') != std::string::npos || raw.find("::") != std::string::npos || camel || call;
    std::string word = to_lower(raw);
    out.all.push_back(word);
    if (code_like) {
      out.identifiers.push_back(word);
      continue;
    }
    bool alpha = std::all_of(word.begin(), word.end(), [](char c) { return c >= 'a' && c <= 'z'; });
    if (!alpha || word.size() < 3 || stopwords().count(word) || neutral_words().count(word)) continue;
    out.content.push_back(word);
  }
  return out;
}

bool matches(const std::regex& re, const std::string& text) { return std::regex_search(text, re); }

const std::regex& links_re() {
  static const std::regex re(
      R"(([A-Za-z0-9_./-]+\.(h|hh|hpp|hxx|c|cc|cpp|cxx|md|txt|rst|html?|py|json|ya?ml)\b(:\d+)?)|(https?://)|(\b(see|refer to|defined in|declared in|described in)\b))",
      std::regex::icase);
  return re;
}

const std::regex& complexity_re() {
  static const std::regex re(
      R"((\bO\s*\([^()]*(\([^()]*\)[^()]*)*\))|(\b(linear|constant|logarithmic|quadratic|polynomial|exponential)[ -]time\b)|(\bamortized\b)|(\btime complexity\b))");
  return re;
}

const std::regex& exceptions_re() {
  static const std::regex re(
      R"(\b(limitation|bounds? check\w*|out of bounds|no bounds|overflows?|underflows?|undefined behaviou?r|not thread[- ]safe|must not|must be called|caller must|assumes?|relies on|may fail|can fail|fails? (if|when)|returns? null|null pointer|warning|caution|beware|wrap(s|ping|around)?|race condition|deadlock|leaks?|error if|not checked|unchecked|precondition|throws?|exceptions?)\b)",
      std::regex::icase);
  return re;
}

const std::regex& alternatives_re() {
  static const std::regex re(
      R"(\b(alternative\w*|instead|could use|could be replaced|consider using|rather than|would be (better|faster|simpler)|better approach|another approach|could be done)\b)",
      std::regex::icase);
  return re;
}

std::size_t sentence_count(std::string_view text) {
  std::size_t n = 0;
  bool in_sentence = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (!is_space(c)) in_sentence = true;
    bool end = (c == '.' || c == '!' || c == '?') && (i + 1 == text.size() || is_space(text[i + 1]));
    if (end && in_sentence) {
      ++n;
      in_sentence = false;
    }
  }
  return n + (in_sentence ? 1 : 0);
}

}  // namespace

std::vector<Category> classify_rules(std::string_view comment_in, std::string_view code) {
  std::string comment(trim(comment_in));
  if (comment.empty()) throw PreconditionError("cannot classify an empty comment");
  if (comment.find("//") != std::string::npos || comment.find("/*") != std::string::npos)
    comment = comment_text(comment);

  std::set<Category> out;
  if (matches(links_re(), comment)) out.insert(Category::Links);
  if (matches(complexity_re(), comment)) out.insert(Category::Complexity);
  if (matches(exceptions_re(), comment)) out.insert(Category::PossibleExceptions);
  if (matches(alternatives_re(), comment)) out.insert(Category::AlternativeSolutions);

  const WordSet vocab = code_vocabulary(code);
  const CommentWords words = comment_words(comment);

  std::size_t overlap = 0;
  std::size_t domain = 0;
  for (const auto& w : words.content) {
    if (in_vocab(vocab, w)) ++overlap;
    else if (!in_vocab(generic_words(), w)) ++domain;
  }
  std::size_t id_overlap = 0;
  for (const auto& id : words.identifiers) {
    std::string base = id.substr(id.rfind(':') == std::string::npos ? 0 : id.rfind(':') + 1);
    if (vocab.count(base)) ++id_overlap;
  }

  if (domain >= 2 && domain * 5 >= words.content.size() * 2) out.insert(Category::DomainMapping);

  bool references_code = !words.identifiers.empty() || overlap > 0;
  if ((words.all.size() >= 12 || sentence_count(comment) >= 2) && references_code)
    out.insert(Category::AlgorithmicDetails);

  const std::size_t n_content = words.content.size();
  bool paraphrase = n_content > 0 && n_content <= 6 && overlap * 4 >= n_content * 3 && out.empty();
  if (paraphrase) {
    out.insert(Category::Irrelevance);
  } else if (overlap + id_overlap > 0 && n_content > overlap) {
    out.insert(Category::Consistency);
  }
  return {out.begin(), out.end()};
}

std::string judge_classification_prompt(std::string_view comment, std::string_view code) {
  std::string p =
      "Classify the comment below into zero or more of these categories. Reply with the category names separated "
      "by commas, or with none.\n"
      "Consistency: the comment agrees with what the code does and adds understanding of it.\n"
      "Irrelevance: the comment only restates what the code or its name already says.\n"
      "DomainMapping: the comment ties the code to concepts of the application domain.\n"
      "PossibleExceptions: the comment warns about limitations, failure cases or unchecked conditions.\n"
      "AlternativeSolutions: the comment names another way to implement the code.\n"
      "Links: the comment points to other code, files, line numbers or external references.\n"
      "AlgorithmicDetails: the comment explains how the code works step by step.\n"
      "Complexity: the comment states time or space complexity.\n\n"
      "Comment:\n";
  p += comment;
  p += "\n\nCode:\n";
  p += code;
  p += '\n';
  return p;
}

std::vector<Category> parse_judge_categories(std::string_view reply) {
  std::string lower = to_lower(reply);
  std::string squashed;
  for (char c : lower)
    if (c != ' ' && c != '_' && c != '-') squashed += c;
  std::vector<Category> out;
  for (Category c : kAllCategories)
    if (squashed.find(to_lower(to_string(c))) != std::string::npos) out.push_back(c);
  return out;
}

CategoryLabel classify_comment(std::string_view comment, std::string_view code, ClassifyMethod method,
                               const JudgeConfig& judge) {
  if (trim(comment).empty()) throw PreconditionError("cannot classify an empty comment");
  CategoryLabel label;
  label.method = method;
  if (method == ClassifyMethod::Rules) {
    label.categories = classify_rules(comment, code);
    return label;
  }
  if (!judge.client || !judge.model) throw ConfigError("judge classification needs a judge model");
  ChatRequest req;
  req.kind = RequestKind::Classify;
  req.user = judge_classification_prompt(comment, code);
  ChatResult r = judge.client->chat(*judge.model, req, GenerationParams{0.0, 64});
  label.categories = parse_judge_categories(r.text);
  return label;
}

std::vector<DistributionRow> category_distribution(const std::vector<CategoryLabel>& labels) {
  if (labels.empty()) throw PreconditionError("category distribution needs at least one label");
  std::map<std::pair<std::string, ClassifyMethod>, std::pair<std::size_t, std::array<std::size_t, 8>>> acc;
  for (const auto& l : labels) {
    auto& [count, hits] = acc[{l.group, l.method}];
    ++count;
    std::set<Category> uniq(l.categories.begin(), l.categories.end());
    for (Category c : uniq) ++hits[static_cast<std::size_t>(c)];
  }
  std::vector<DistributionRow> rows;
  for (const auto& [key, value] : acc) {
    DistributionRow row;
    row.group = key.first;
    row.method = key.second;
    row.comments = value.first;
    for (std::size_t i = 0; i < 8; ++i)
      row.percent[i] = 100.0 * static_cast<double>(value.second[i]) / static_cast<double>(value.first);
    rows.push_back(row);
  }
  return rows;
}

std::string render_distribution(const std::vector<DistributionRow>& rows) {
  std::string out = "group\tmethod\tcomments";
  for (Category c : kAllCategories) out += "\t" + std::string(to_string(c));
  out += '\n';
  for (const auto& r : rows) {
    out += r.group + "\t" + std::string(to_string(r.method)) + "\t" + std::to_string(r.comments);
    for (double p : r.percent) out += "\t" + format_fixed(p, 2);
    out += '\n';
  }
  return out;
}

std::string render_reference_distribution() {
  std::string out = "category\t%useful\n";
  for (Category c : kAllCategories) out += std::string(to_string(c)) + "\t" + format_fixed(reference_useful_percent(c), 2) + "\n";
  return out;
}

}  // namespace commentgen
