#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "commentgen/docstore.hpp"
#include "commentgen/text.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path fixture_dir() { return fs::path(CG_FIXTURE_DIR); }
inline fs::path data_dir() { return fs::path(CG_DATA_DIR); }

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "cg") {
    static std::atomic<unsigned> counter{0};
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            (tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& p) const { return path_ / p; }

 private:
  fs::path path_;
};

// 50 chunks over a small vocabulary. Chunks 40..49 repeat the text of
// 0..9 under other document types so equal scores occur and the tie order
// matters.
inline std::vector<commentgen::DocChunk> fifty_chunks() {
  static const char* vocab[] = {"timer", "heap", "loop", "callback", "deadline", "repeat", "install",
                                "build", "module", "interface", "test", "release", "config", "socket",
                                "buffer", "parser", "token", "escape", "json", "thread"};
  std::mt19937_64 rng(4242);
  std::vector<commentgen::DocChunk> out;
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < 50; ++i) {
    std::string text;
    if (i >= 40) {
      text = texts[i - 40];
    } else {
      std::size_t len = 4 + rng() % 25;
      for (std::size_t w = 0; w < len; ++w) text += std::string(vocab[rng() % 20]) + (w % 7 == 6 ? ". " : " ");
    }
    texts.push_back(text);
    commentgen::DocChunk c;
    c.doc_id = "doc" + std::to_string(i % 7) + ".md";
    c.ordinal = static_cast<std::uint32_t>(i);
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%04u", c.ordinal);
    c.chunk_id = c.doc_id + buf;
    c.doc_type = commentgen::kAllDocTypes[(i * 5) % 9];
    c.text = text;
    out.push_back(c);
  }
  return out;
}

// Writes a small C repository: `files` sources under src/, a shared header,
// a Makefile and a docs/ tree. No system headers, so the frontend is fast.
inline void generate_corpus(const fs::path& root, std::size_t files = 30) {
  using commentgen::write_file;
  write_file(root / "Makefile", "CFLAGS = -O2 -Iinclude\nall:\n\t$(CC) $(CFLAGS) -c src/*.c\n");
  write_file(root / "include" / "common.h",
             "#ifndef COMMON_H\n#define COMMON_H\n\ntypedef unsigned long size_t2;\n\n"
             "struct buffer {\n  char *data;\n  size_t2 len;\n  size_t2 cap;\n};\n\n"
             "static inline size_t2 buffer_room(const struct buffer *b) { return b->cap - b->len; }\n\n#endif\n");
  static const char* topics[] = {"timer", "queue", "parser", "cache", "socket", "codec"};
  for (std::size_t i = 0; i < files; ++i) {
    std::string t = topics[i % 6];
    std::string p = t + std::to_string(i);
    std::string src = "#include \"common.h\"\n\n";
    src += "struct " + p + "_state {\n  int count;\n  int limit;\n  struct buffer buf;\n};\n\n";
    src += "/* Resets the " + t + " state so it can be reused. */\n";
    src += "void " + p + "_reset(struct " + p + "_state *s) {\n  s->count = 0;\n  s->buf.len = 0;\n}\n\n";
    src += "// Adds n items to the " + t + ", clamping at the limit.\n// Returns the new count.\n";
    src += "int " + p + "_add(struct " + p + "_state *s, int n) {\n  if (s->count + n > s->limit)\n"
           "    n = s->limit - s->count;\n  s->count += n;\n  return s->count;\n}\n\n";
    src += "/**\n * O(n) scan of the buffer looking for byte c.\n * Returns -1 when c is absent.\n */\n";
    src += "long " + p + "_find(const struct " + p + "_state *s, char c) {\n  const char *q = \"/* not a comment */\";\n"
           "  size_t2 i;\n  (void)q;\n  for (i = 0; i < s->buf.len; ++i)\n    if (s->buf.data[i] == c)\n"
           "      return (long)i;\n  return -1;\n}\n\n";
    src += "int " + p + "_drain(struct " + p + "_state *s) {\n  int left = " + p + "_add(s, 0);\n  " + p +
           "_reset(s);\n  return left + (int)buffer_room(&s->buf);\n}\n";
    if (i % 3 == 0) {
      src += "\n/* See docs/design.md for the " + t + " limit policy. */\nint " + p +
             "_limit(const struct " + p + "_state *s) {\n  return s->limit;\n}\n";
    }
    write_file(root / "src" / (p + ".c"), src);
  }
  write_file(root / "docs" / "README.md",
             "# Fixture project\n\nThis manual explains how to install and build the library.\n\n"
             "Run make to build. Each module exposes reset, add, find and drain.\n");
  write_file(root / "docs" / "design.md",
             "# Design\n\nThe component architecture splits the library into timer, queue, parser, cache, "
             "socket and codec modules. Each module interface owns a state struct with a buffer.\n\n"
             "The limit policy clamps additions so count never exceeds limit. find is a linear scan.\n");
  write_file(root / "docs" / "testing.md",
             "# Test plan\n\nUnit tests cover reset, add and drain. Test cases check the clamping at the limit "
             "and the find result when the byte is absent.\n");
  write_file(root / "docs" / "CONTRIBUTING.md",
             "# Contributing\n\nOpen an issue before a pull request. Releases are tagged from main after the "
             "continuous integration pipeline passes.\n");
}

struct LiteralCase {
  std::string source;
  std::vector<std::string> literals;  // exact spellings, in source order
};

// Declarations whose string/char literals are full of comment lookalikes,
// interleaved with real comments tagged CMTn.
inline LiteralCase literal_case(std::mt19937_64& rng, std::size_t index) {
  static const char* pieces[] = {"//", "/*", "*/", "\\\"", "\\\\", "'", "a", " ", "x/y", "*", "/", "\\n", "R(", ")"};
  LiteralCase out;
  std::size_t decls = 1 + rng() % 4;
  for (std::size_t d = 0; d < decls; ++d) {
    std::string lit;
    switch (rng() % 4) {
      case 0:
      case 1: {
        std::string body;
        std::size_t n = rng() % 8;
        for (std::size_t k = 0; k < n; ++k) body += pieces[rng() % 14];
        lit = "\"" + body + "\"";
        break;
      }
      case 2: {
        static const char* chars[] = {"'/'", "'*'", "'\\''", "'\"'", "'\\\\'"};
        lit = chars[rng() % 5];
        break;
      }
      default: {
        std::string body;
        std::size_t n = rng() % 6;
        for (std::size_t k = 0; k < n; ++k) body += pieces[rng() % 3];
        body += "\"";
        lit = "R\"x(" + body + ")x\"";
      }
    }
    out.literals.push_back(lit);
    out.source += "const char *v" + std::to_string(d) + " = " + lit + ";";
    switch (rng() % 3) {
      case 0: out.source += " // CMT" + std::to_string(index) + " \"not a literal\n"; break;
      case 1: out.source += " /* CMT" + std::to_string(index) + " '// */\n"; break;
      default: out.source += "\n";
    }
  }
  return out;
}

}  // namespace testsupport
