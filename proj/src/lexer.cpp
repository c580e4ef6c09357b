#include "commentgen/lexer.hpp"

#include "commentgen/error.hpp"
#include "commentgen/text.hpp"

namespace commentgen {
namespace {

// Index just past the line comment starting at `i` (points at the newline or end).
std::size_t scan_line_comment(std::string_view s, std::size_t i) {
  std::size_t j = i + 2;
  while (j < s.size()) {
    if (s[j] == '\n') {
      // backslash-newline (optionally \r\n) continues the comment
      std::size_t k = j;
      if (k > 0 && s[k - 1] == '\r') --k;
      if (k > 0 && s[k - 1] == '\\') {
        ++j;
        continue;
      }
      break;
    }
    ++j;
  }
  return j;
}

std::size_t scan_quoted(std::string_view s, std::size_t i, char quote) {
  std::size_t j = i + 1;
  while (j < s.size()) {
    char c = s[j];
    if (c == '\\') {
      j += 2;
      continue;
    }
    if (c == quote) return j + 1;
    if (c == '\n') return j;  // unterminated: ends at newline
    ++j;
  }
  return s.size();
}

// If `i` (at a '"') opens a raw string literal, returns its end; otherwise npos.
std::size_t scan_raw_string(std::string_view s, std::size_t i) {
  std::size_t b = i;
  while (b > 0 && is_ident_char(s[b - 1])) --b;
  std::string_view prefix = s.substr(b, i - b);
  if (prefix != "R" && prefix != "u8R" && prefix != "uR" && prefix != "UR" && prefix != "LR")
    return std::string_view::npos;
  std::size_t open = s.find('(', i + 1);
  if (open == std::string_view::npos || open - (i + 1) > 16) return std::string_view::npos;
  std::string_view delim = s.substr(i + 1, open - (i + 1));
  for (char c : delim)
    if (c == ' ' || c == '\\' || c == ')' || c == '\n' || c == '"') return std::string_view::npos;
  std::string terminator = ")" + std::string(delim) + "\"";
  std::size_t close = s.find(terminator, open + 1);
  if (close == std::string_view::npos) return s.size();
  return close + terminator.size();
}

// A quote preceded by a pp-number (1'000, 0xFF'FF) is a digit separator.
bool is_digit_separator(std::string_view s, std::size_t i) {
  if (i == 0 || i + 1 >= s.size()) return false;
  if (!is_ident_char(s[i - 1]) || !is_ident_char(s[i + 1])) return false;
  std::size_t b = i;
  while (b > 0 && (is_ident_char(s[b - 1]) || s[b - 1] == '\'' || s[b - 1] == '.')) --b;
  return s[b] >= '0' && s[b] <= '9';
}

}  // namespace

std::vector<Segment> lex_segments(std::string_view s) {
  std::vector<Segment> out;
  auto push = [&](SegmentKind kind, std::size_t b, std::size_t e) {
    if (b == e) return;
    if (kind == SegmentKind::Code && !out.empty() && out.back().kind == SegmentKind::Code &&
        out.back().end == b) {
      out.back().end = e;
      return;
    }
    out.push_back({kind, b, e});
  };

  std::size_t i = 0;
  std::size_t code_start = 0;
  while (i < s.size()) {
    char c = s[i];
    char next = i + 1 < s.size() ? s[i + 1] : '\0';
    if (c == '/' && next == '/') {
      push(SegmentKind::Code, code_start, i);
      std::size_t e = scan_line_comment(s, i);
      push(SegmentKind::LineComment, i, e);
      i = code_start = e;
    } else if (c == '/' && next == '*') {
      push(SegmentKind::Code, code_start, i);
      std::size_t close = s.find("*/", i + 2);
      if (close == std::string_view::npos) throw ParseError("unterminated block comment", i);
      push(SegmentKind::BlockComment, i, close + 2);
      i = code_start = close + 2;
    } else if (c == '"') {
      std::size_t e = scan_raw_string(s, i);
      std::size_t b = i;
      if (e == std::string_view::npos) {
        e = scan_quoted(s, i, '"');
      } else {
        // the encoding prefix belongs to the literal
        while (b > code_start && is_ident_char(s[b - 1])) --b;
      }
      push(SegmentKind::Code, code_start, b);
      push(SegmentKind::StringLiteral, b, e);
      i = code_start = e;
    } else if (c == '\'' && !is_digit_separator(s, i)) {
      push(SegmentKind::Code, code_start, i);
      std::size_t e = scan_quoted(s, i, '\'');
      push(SegmentKind::CharLiteral, i, e);
      i = code_start = e;
    } else {
      ++i;
    }
  }
  push(SegmentKind::Code, code_start, s.size());
  return out;
}

std::string strip_comments(std::string_view src) {
  auto segments = lex_segments(src);
  std::string out;
  out.reserve(src.size());
  for (const auto& seg : segments) {
    std::string_view piece = src.substr(seg.begin, seg.end - seg.begin);
    switch (seg.kind) {
      case SegmentKind::LineComment:
        for (char c : piece)
          if (c == '\n') out.push_back('\n');
        break;
      case SegmentKind::BlockComment:
        out.push_back(' ');
        for (char c : piece)
          if (c == '\n') out.push_back('\n');
        break;
      default:
        out.append(piece);
    }
  }
  return out;
}

std::string mask_comments_and_literals(std::string_view src) {
  auto segments = lex_segments(src);
  std::string out(src);
  for (const auto& seg : segments) {
    switch (seg.kind) {
      case SegmentKind::Code:
        break;
      case SegmentKind::LineComment:
      case SegmentKind::BlockComment:
        for (std::size_t i = seg.begin; i < seg.end; ++i)
          if (out[i] != '\n') out[i] = ' ';
        break;
      case SegmentKind::StringLiteral:
      case SegmentKind::CharLiteral: {
        char q = seg.kind == SegmentKind::StringLiteral ? '"' : '\'';
        for (std::size_t i = seg.begin; i < seg.end; ++i)
          if (out[i] != '\n') out[i] = '_';
        out[seg.begin] = q;
        if (seg.end - seg.begin >= 2 && src[seg.end - 1] == q) out[seg.end - 1] = q;
        break;
      }
    }
  }
  return out;
}

CommentStyle classify_comment_style(std::string_view raw) {
  raw = trim(raw);
  if (raw.substr(0, 3) == "/**" && raw.substr(0, 4) != "/**/") return CommentStyle::Doxygen;
  if (raw.substr(0, 3) == "/*!") return CommentStyle::Doxygen;
  if (raw.substr(0, 3) == "//!") return CommentStyle::Doxygen;
  if (raw.substr(0, 3) == "///" && raw.substr(0, 4) != "////") return CommentStyle::Doxygen;
  if (raw.substr(0, 2) == "/*") return CommentStyle::Block;
  return CommentStyle::Line;
}

std::string comment_text(std::string_view raw) {
  raw = trim(raw);
  std::vector<std::string> lines;
  if (raw.substr(0, 2) == "/*") {
    std::string_view inner = raw.substr(2);
    if (inner.size() >= 2 && inner.substr(inner.size() - 2) == "*/") inner.remove_suffix(2);
    if (!inner.empty() && (inner.front() == '*' || inner.front() == '!')) inner.remove_prefix(1);
    for (std::string_view line : split_lines(inner)) {
      line = trim(line);
      while (!line.empty() && line.front() == '*') line.remove_prefix(1);
      while (!line.empty() && line.back() == '*') line.remove_suffix(1);
      lines.emplace_back(trim(line));
    }
  } else {
    for (std::string_view line : split_lines(raw)) {
      line = trim(line);
      if (line.substr(0, 2) == "//") line.remove_prefix(2);
      if (!line.empty() && (line.front() == '/' || line.front() == '!')) line.remove_prefix(1);
      lines.emplace_back(trim(line));
    }
  }
  while (!lines.empty() && lines.front().empty()) lines.erase(lines.begin());
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  std::string text;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) text.push_back('\n');
    text += lines[i];
  }
  // the text must not carry delimiters, even ones quoted inside the comment
  for (std::string_view d : {"/*", "*/", "//"}) {
    for (std::size_t p = text.find(d); p != std::string::npos; p = text.find(d, p)) text.erase(p, 2);
  }
  return std::string(trim(text));
}

std::vector<CommentBlock> collect_comment_blocks(std::string_view src,
                                                 const std::vector<Segment>& segments) {
  auto starts_line = [&](std::size_t pos) {
    while (pos > 0 && (src[pos - 1] == ' ' || src[pos - 1] == '\t')) --pos;
    return pos == 0 || src[pos - 1] == '\n';
  };

  std::vector<CommentBlock> blocks;
  bool prev_mergeable = false;
  for (const auto& seg : segments) {
    bool is_line = seg.kind == SegmentKind::LineComment;
    if (!is_line && seg.kind != SegmentKind::BlockComment) {
      // whitespace-only code between two line comments keeps them mergeable
      if (seg.kind == SegmentKind::Code && prev_mergeable) {
        std::string_view gap = src.substr(seg.begin, seg.end - seg.begin);
        if (!trim(gap).empty() || count_newlines(gap) != 1) prev_mergeable = false;
      } else {
        prev_mergeable = false;
      }
      continue;
    }
    bool own_line = starts_line(seg.begin);
    if (is_line && own_line && prev_mergeable && !blocks.empty() &&
        classify_comment_style(src.substr(seg.begin, seg.end - seg.begin)) == blocks.back().style) {
      auto& b = blocks.back();
      b.span_end = seg.end;
    } else {
      CommentBlock b;
      b.span_begin = seg.begin;
      b.span_end = seg.end;
      b.style = classify_comment_style(src.substr(seg.begin, seg.end - seg.begin));
      blocks.push_back(std::move(b));
    }
    prev_mergeable = is_line && own_line;
  }
  for (auto& b : blocks) {
    b.raw = std::string(src.substr(b.span_begin, b.span_end - b.span_begin));
    b.text = comment_text(b.raw);
  }
  return blocks;
}

std::vector<CommentBlock> collect_comment_blocks(std::string_view src) {
  return collect_comment_blocks(src, lex_segments(src));
}

std::string_view to_string(CommentStyle style) {
  switch (style) {
    case CommentStyle::Line: return "line";
    case CommentStyle::Block: return "block";
    case CommentStyle::Doxygen: return "doxygen";
  }
  return "line";
}

CommentStyle comment_style_from_string(std::string_view s) {
  if (s == "block") return CommentStyle::Block;
  if (s == "doxygen") return CommentStyle::Doxygen;
  return CommentStyle::Line;
}

}  // namespace commentgen
