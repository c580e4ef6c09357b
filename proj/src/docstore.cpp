#include "commentgen/docstore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <set>

#include "commentgen/error.hpp"
#include "commentgen/lexer.hpp"
#include "commentgen/text.hpp"
#include "commentgen/tokenize.hpp"

namespace commentgen {
namespace fs = std::filesystem;

std::string_view to_string(DocType type) {
  switch (type) {
    case DocType::Requirements: return "Requirements";
    case DocType::Architecture: return "Architecture";
    case DocType::DetailedDesign: return "DetailedDesign";
    case DocType::Implementation: return "Implementation";
    case DocType::Test: return "Test";
    case DocType::ProjectManagement: return "ProjectManagement";
    case DocType::ConfigurationManagement: return "ConfigurationManagement";
    case DocType::ProjectInfrastructure: return "ProjectInfrastructure";
    case DocType::UserSoftware: return "UserSoftware";
  }
  return "UserSoftware";
}

DocType doc_type_from_string(std::string_view s) {
  for (DocType t : kAllDocTypes)
    if (to_string(t) == s) return t;
  throw ConfigError("unknown document type '" + std::string(s) + "'");
}

int frequency_prior(DocType type) {
  switch (type) {
    case DocType::Requirements: return 24;
    case DocType::Architecture: return 62;
    case DocType::DetailedDesign: return 16;
    case DocType::Implementation: return 72;
    case DocType::Test: return 48;
    case DocType::ProjectManagement: return 28;
    case DocType::ConfigurationManagement: return 64;
    case DocType::ProjectInfrastructure: return 22;
    case DocType::UserSoftware: return 96;
  }
  return 0;
}

namespace {

struct Cues {
  DocType type;
  std::vector<std::string_view> path_words;
  std::vector<std::string_view> phrases;
};

const std::vector<Cues>& cue_table() {
  static const std::vector<Cues> table = {
      {DocType::Requirements,
       {"requirement", "requirements", "srs", "prd"},
       {"shall", "acceptance criteria", "requirement", "functional requirement", "must support",
        "user story", "priority"}},
      {DocType::Architecture,
       {"architecture", "overview", "design-overview"},
       {"component", "interface", "module diagram", "architecture", "decomposition", "data exchange",
        "layer", "subsystem"}},
      {DocType::DetailedDesign,
       {"design", "detailed", "uml"},
       {"uml", "sequence diagram", "class diagram", "use case", "data model", "object model",
        "state machine", "booch", "behavior model"}},
      {DocType::Implementation,
       {"internals", "implementation", "hacking"},
       {"implementation", "algorithm", "internals", "invariant", "complexity", "data structure",
        "under the hood", "is implemented"}},
      {DocType::Test,
       {"test", "tests", "testing", "qa"},
       {"test plan", "test case", "unit test", "test report", "coverage", "regression", "test suite"}},
      {DocType::ProjectManagement,
       {"roadmap", "milestones", "milestone", "schedule", "plan"},
       {"milestone", "roadmap", "schedule", "gantt", "release plan", "sprint", "timeline", "deadline"}},
      {DocType::ConfigurationManagement,
       {"changelog", "changes", "news", "release", "releases", "history", "versioning"},
       {"changelog", "versioning", "release", "branch", "tag", "semantic version", "repository structure",
        "backward compatible"}},
      {DocType::ProjectInfrastructure,
       {"contributing", "conventions", "style", "code_of_conduct", "governance"},
       {"coding style", "convention", "contributing", "code of conduct", "pull request", "template",
        "style guide", "code review"}},
      {DocType::UserSoftware,
       {"readme", "manual", "tutorial", "guide", "faq", "usage", "install", "howto", "getting"},
       {"manual", "tutorial", "online help", "error message", "usage", "getting started", "install",
        "example", "quick start"}},
  };
  return table;
}

bool word_char(char c) { return is_ident_char(c); }

// Occurrences of `cue` at word boundaries, allowing a plural "s"/"es" suffix.
int count_phrase(std::string_view text, std::string_view cue) {
  int count = 0;
  for (std::size_t p = text.find(cue); p != std::string_view::npos; p = text.find(cue, p + 1)) {
    if (p > 0 && word_char(text[p - 1])) continue;
    std::size_t e = p + cue.size();
    if (e < text.size() && text[e] == 's') ++e;
    else if (e + 1 < text.size() && text[e] == 'e' && text[e + 1] == 's') e += 2;
    if (e < text.size() && word_char(text[e])) continue;
    ++count;
  }
  return count;
}

std::vector<std::string> path_words(std::string_view path) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : to_lower(path)) {
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-') {
      cur.push_back(c);
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

}  // namespace

DocType classify_doc(std::string_view path, std::string_view content) {
  if (trim(content).empty()) throw PreconditionError("cannot classify an empty document: " + std::string(path));
  std::string lower = to_lower(content);
  auto words = path_words(path);
  DocType best = DocType::UserSoftware;
  int best_score = -1;
  for (const auto& cues : cue_table()) {
    int score = 0;
    for (auto w : cues.path_words)
      for (const auto& pw : words)
        if (pw == w || pw == std::string(w) + "s") score += 3;
    for (auto phrase : cues.phrases) score += std::min(3, count_phrase(lower, phrase));
    if (score > best_score || (score == best_score && frequency_prior(cues.type) > frequency_prior(best))) {
      best = cues.type;
      best_score = score;
    }
  }
  return best;
}

std::string extract_plain_text(std::string_view path, std::string_view raw) {
  std::string ext = to_lower(fs::path(std::string(path)).extension().string());
  if (ext != ".html" && ext != ".htm") return std::string(raw);
  std::string out;
  std::string lower = to_lower(raw);
  std::size_t i = 0;
  while (i < raw.size()) {
    if (raw[i] == '<') {
      for (std::string_view skip : {"<script", "<style"}) {
        if (lower.compare(i, skip.size(), skip) == 0) {
          std::string close = "</" + std::string(skip.substr(1));
          std::size_t e = lower.find(close, i);
          i = e == std::string::npos ? raw.size() : e;
          break;
        }
      }
      std::size_t close = raw.find('>', i);
      if (close == std::string_view::npos) break;
      std::string_view tag = lower.substr(i, close - i);
      if (tag.rfind("<p", 0) == 0 || tag.rfind("</p", 0) == 0 || tag.rfind("<br", 0) == 0 ||
          tag.rfind("<h", 0) == 0 || tag.rfind("</h", 0) == 0 || tag.rfind("<li", 0) == 0 ||
          tag.rfind("<div", 0) == 0)
        out += '\n';
      i = close + 1;
      continue;
    }
    if (raw[i] == '&') {
      static const std::pair<std::string_view, char> entities[] = {
          {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&#39;", '\''}, {"&nbsp;", ' '}};
      bool matched = false;
      for (auto [ent, ch] : entities) {
        if (raw.substr(i, ent.size()) == ent) {
          out += ch;
          i += ent.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    out += raw[i++];
  }
  return out;
}

DesignDoc make_design_doc(std::string doc_id, std::string_view path, std::string_view raw) {
  DesignDoc doc;
  doc.doc_id = std::move(doc_id);
  doc.path = std::string(path);
  doc.content = extract_plain_text(path, raw);
  if (trim(doc.content).empty()) throw PreconditionError("document has no text: " + doc.path);
  doc.doc_type = classify_doc(path, doc.content);
  for (std::string_view line : split_lines(doc.content)) {
    std::string_view t = trim(line);
    while (!t.empty() && t.front() == '#') t.remove_prefix(1);
    t = trim(t);
    if (!t.empty()) {
      doc.title = std::string(t.substr(0, 120));
      break;
    }
  }
  return doc;
}

std::vector<DesignDoc> load_design_docs(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("documentation directory not found: " + dir.string());
  static const std::set<std::string> exts = {".md", ".markdown", ".txt", ".rst", ".html", ".htm"};
  static const std::set<std::string> bare = {"readme", "install", "changelog", "changes", "news",
                                             "contributing", "authors", "todo", "hacking"};
  std::vector<std::pair<std::string, fs::path>> found;
  for (fs::recursive_directory_iterator it(dir, fs::directory_options::skip_permission_denied, ec), end;
       !ec && it != end; it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    std::string ext = to_lower(it->path().extension().string());
    std::string stem = to_lower(it->path().stem().string());
    if (!exts.count(ext) && !(ext.empty() && bare.count(stem))) continue;
    found.emplace_back(it->path().lexically_relative(dir).generic_string(), it->path());
  }
  std::sort(found.begin(), found.end());
  std::vector<DesignDoc> docs;
  for (const auto& [rel, full] : found) {
    std::string raw = read_file(full);
    if (trim(extract_plain_text(rel, raw)).empty()) continue;
    docs.push_back(make_design_doc(rel, rel, raw));
  }
  return docs;
}

namespace {

std::size_t best_split(std::string_view s, std::size_t lo, std::size_t hi) {
  for (std::size_t p = hi; p >= lo + 2; --p)
    if (s[p - 1] == '\n' && s[p - 2] == '\n') return p;
  for (std::size_t p = hi; p >= lo + 2; --p) {
    char punct = s[p - 2];
    if ((punct == '.' || punct == '!' || punct == '?') && is_space(s[p - 1])) return p;
  }
  for (std::size_t p = hi; p >= lo + 1; --p)
    if (is_space(s[p - 1])) return p;
  std::size_t p = hi;
  while (p > lo && (static_cast<unsigned char>(s[p]) & 0xC0) == 0x80) --p;  // stay on a UTF-8 boundary
  return p;
}

std::string chunk_id_for(const std::string& doc_id, std::uint32_t ordinal) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04u", ordinal);
  return doc_id + "#" + buf;
}

}  // namespace

std::vector<DocChunk> chunk_doc(const DesignDoc& doc, std::size_t chunk_size, std::size_t overlap) {
  if (chunk_size == 0 || overlap >= chunk_size)
    throw PreconditionError("chunking requires 0 <= overlap < chunk_size (got overlap " + std::to_string(overlap) +
                            ", size " + std::to_string(chunk_size) + ")");
  std::string_view s = doc.content;
  std::vector<DocChunk> chunks;
  std::size_t start = 0;
  while (true) {
    std::size_t end = s.size();
    if (s.size() - start > chunk_size) {
      std::size_t hi = start + chunk_size;
      std::size_t lo = start + std::max(overlap + 1, chunk_size / 2);
      end = best_split(s, std::min(lo, hi), hi);
    }
    DocChunk c;
    c.ordinal = static_cast<std::uint32_t>(chunks.size());
    c.chunk_id = chunk_id_for(doc.doc_id, c.ordinal);
    c.doc_id = doc.doc_id;
    c.doc_type = doc.doc_type;
    c.start_offset = start;
    c.text = std::string(s.substr(start, end - start));
    c.terms = tokenize_terms(c.text);
    chunks.push_back(std::move(c));
    if (end >= s.size()) break;
    start = end - overlap;
  }
  return chunks;
}

double okapi_idf(std::size_t n_chunks, std::size_t df) {
  double n = static_cast<double>(n_chunks);
  double d = static_cast<double>(df);
  return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
}

Index build_index(std::vector<DocChunk> chunks, OkapiParams params) {
  if (chunks.empty()) throw PreconditionError("cannot index an empty chunk list");
  std::sort(chunks.begin(), chunks.end(),
            [](const DocChunk& a, const DocChunk& b) { return a.chunk_id < b.chunk_id; });
  Index index;
  index.params = params;
  index.chunk_len.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (chunks[i].terms.empty() && !chunks[i].text.empty()) chunks[i].terms = tokenize_terms(chunks[i].text);
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : chunks[i].terms) ++tf[t];
    for (const auto& [term, count] : tf) index.postings[term].push_back({static_cast<std::uint32_t>(i), count});
    index.chunk_len.push_back(static_cast<std::uint32_t>(chunks[i].terms.size()));
  }
  for (const auto& [term, list] : index.postings) index.doc_freq[term] = static_cast<std::uint32_t>(list.size());
  double total = std::accumulate(index.chunk_len.begin(), index.chunk_len.end(), 0.0);
  index.avg_len = total / static_cast<double>(index.chunk_len.size());
  index.chunks = std::move(chunks);
  return index;
}

std::vector<Hit> retrieve(const Index& index, std::string_view query, std::size_t k,
                          std::optional<DocType> only_type) {
  if (k == 0) throw PreconditionError("retrieve requires k >= 1");
  std::vector<std::string> terms = tokenize_terms(query);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

  const std::size_t n = index.chunks.size();
  const double k1 = index.params.k1;
  const double b = index.params.b;
  std::vector<double> scores(n, 0.0);
  std::vector<bool> touched(n, false);
  for (const auto& term : terms) {
    auto it = index.postings.find(term);
    if (it == index.postings.end()) continue;
    double idf = okapi_idf(n, it->second.size());
    for (const auto& p : it->second) {
      double tf = p.tf;
      double len_norm = 1.0 - b + b * static_cast<double>(index.chunk_len[p.chunk]) / index.avg_len;
      scores[p.chunk] += idf * tf * (k1 + 1.0) / (tf + k1 * len_norm);
      touched[p.chunk] = true;
    }
  }
  std::vector<Hit> hits;
  for (std::size_t i = 0; i < n; ++i) {
    if (!touched[i]) continue;
    if (only_type && index.chunks[i].doc_type != *only_type) continue;
    hits.push_back({i, scores[i]});
  }
  auto order = [&](const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    int pa = frequency_prior(index.chunks[a.chunk].doc_type);
    int pb = frequency_prior(index.chunks[b.chunk].doc_type);
    if (pa != pb) return pa > pb;
    return index.chunks[a.chunk].chunk_id < index.chunks[b.chunk].chunk_id;
  };
  if (hits.size() > k) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), order);
    hits.resize(k);
  } else {
    std::sort(hits.begin(), hits.end(), order);
  }
  return hits;
}

namespace {

constexpr char kMagic[4] = {'C', 'G', 'I', 'X'};

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void raw(std::string_view s) { buf_.append(s); }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * i);
    return v;
  }
  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string str() {
    std::uint32_t n = u32();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw ParseError("truncated index file", pos_);
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_index(const Index& index, const fs::path& out) {
  Writer w;
  w.raw(std::string_view(kMagic, 4));
  w.u8(kIndexFormatVersion);
  w.f64(index.params.k1);
  w.f64(index.params.b);
  w.u32(static_cast<std::uint32_t>(index.chunks.size()));
  for (const auto& c : index.chunks) {
    w.str(c.chunk_id);
    w.str(c.doc_id);
    w.u8(static_cast<std::uint8_t>(c.doc_type));
    w.u32(c.ordinal);
    w.u64(c.start_offset);
    w.str(c.text);
    w.u32(static_cast<std::uint32_t>(c.terms.size()));
    for (const auto& t : c.terms) w.str(t);
  }
  w.u32(static_cast<std::uint32_t>(index.postings.size()));
  for (const auto& [term, list] : index.postings) {
    w.str(term);
    w.u32(static_cast<std::uint32_t>(list.size()));
    for (const auto& p : list) {
      w.u32(p.chunk);
      w.u32(p.tf);
    }
  }
  write_file(out, w.data());
}

Index load_index(const fs::path& in) {
  std::string data = read_file(in);
  Reader r(data);
  if (data.size() < 5 || std::string_view(data).substr(0, 4) != std::string_view(kMagic, 4))
    throw ParseError("not an index file (bad magic): " + in.string(), 0);
  r.raw(4);
  std::uint8_t version = r.u8();
  if (version != kIndexFormatVersion)
    throw ParseError("unsupported index format version " + std::to_string(version), 4);
  Index index;
  index.params.k1 = r.f64();
  index.params.b = r.f64();
  std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    DocChunk c;
    c.chunk_id = r.str();
    c.doc_id = r.str();
    std::uint8_t type = r.u8();
    if (type >= kAllDocTypes.size()) throw ParseError("bad document type in index", 0);
    c.doc_type = static_cast<DocType>(type);
    c.ordinal = r.u32();
    c.start_offset = r.u64();
    c.text = r.str();
    std::uint32_t nt = r.u32();
    c.terms.reserve(nt);
    for (std::uint32_t t = 0; t < nt; ++t) c.terms.push_back(r.str());
    index.chunk_len.push_back(nt);
    index.chunks.push_back(std::move(c));
  }
  std::uint32_t nterms = r.u32();
  for (std::uint32_t i = 0; i < nterms; ++i) {
    std::string term = r.str();
    std::uint32_t np = r.u32();
    auto& list = index.postings[term];
    for (std::uint32_t p = 0; p < np; ++p) {
      std::uint32_t chunk = r.u32();
      std::uint32_t tf = r.u32();
      if (chunk >= n) throw ParseError("posting refers to a missing chunk", 0);
      list.push_back({chunk, tf});
    }
    index.doc_freq[term] = np;
  }
  if (!r.done()) throw ParseError("trailing bytes in index file", data.size());
  double total = std::accumulate(index.chunk_len.begin(), index.chunk_len.end(), 0.0);
  index.avg_len = n ? total / n : 0.0;
  return index;
}

std::vector<Hit> OkapiRetriever::retrieve(std::string_view query, std::size_t k) const {
  return commentgen::retrieve(index_, query, k, only_type_);
}

EmbeddingRetriever::EmbeddingRetriever(Index index, std::shared_ptr<Embedder> embedder)
    : index_(std::move(index)), embedder_(std::move(embedder)) {
  for (const auto& c : index_.chunks) chunk_vectors_.push_back(sentence_vector(embedder_->embed_tokens(c.terms)));
}

std::vector<Hit> EmbeddingRetriever::retrieve(std::string_view query, std::size_t k) const {
  if (k == 0) throw PreconditionError("retrieve requires k >= 1");
  auto terms = tokenize_terms(query);
  if (terms.empty()) return {};
  Eigen::VectorXd q = sentence_vector(embedder_->embed_tokens(terms));
  std::vector<Hit> hits;
  for (std::size_t i = 0; i < chunk_vectors_.size(); ++i) hits.push_back({i, q.dot(chunk_vectors_[i])});
  std::sort(hits.begin(), hits.end(), [&](const Hit& a, const Hit& b) {
    if (a.score != b.score) return a.score > b.score;
    return index_.chunks[a.chunk].chunk_id < index_.chunks[b.chunk].chunk_id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::string build_unit_query(const CodeUnit& unit) {
  static const std::set<std::string, std::less<>> keywords = {
      "if", "else", "for", "while", "do", "switch", "case", "default", "break", "continue", "return",
      "goto", "sizeof", "int", "char", "void", "long", "short", "unsigned", "signed", "float", "double",
      "const", "static", "struct", "union", "enum", "typedef", "volatile", "auto", "bool", "true",
      "false", "nullptr", "NULL", "this", "new", "delete", "inline", "extern", "register"};
  std::string query = unit.signature;
  std::string body = mask_comments_and_literals(unit.code);
  std::set<std::string, std::less<>> seen;
  std::size_t i = unit.body_begin >= unit.start_byte ? unit.body_begin - unit.start_byte : 0;
  while (i < body.size()) {
    if (!is_ident_start(body[i])) {
      ++i;
      continue;
    }
    std::size_t b = i;
    while (i < body.size() && is_ident_char(body[i])) ++i;
    std::string id = body.substr(b, i - b);
    if (keywords.count(id) || !seen.insert(id).second) continue;
    query += ' ';
    query += id;
  }
  query += ' ';
  query += fs::path(unit.path).stem().string();
  return query;
}

}  // namespace commentgen
