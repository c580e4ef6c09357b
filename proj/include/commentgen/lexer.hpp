#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace commentgen {

enum class SegmentKind { Code, LineComment, BlockComment, StringLiteral, CharLiteral };

/// A half-open byte range [begin, end) of one lexical class.
struct Segment {
  SegmentKind kind;
  std::size_t begin;
  std::size_t end;
};

/// Splits C/C++ source into code, comment and literal segments.
///
/// Understands escapes, raw string literals (`R"tag(...)tag"`), digit
/// separators (`1'000`) and backslash-continued line comments. Unterminated
/// string/char literals end at the newline. Segments are contiguous and
/// cover the whole input.
///
/// Throws ParseError (offset of the opening `/*`) on an unterminated block
/// comment.
std::vector<Segment> lex_segments(std::string_view src);

/// Removes every comment, leaving literals untouched. A block comment becomes
/// one space followed by the newlines it spanned; a line comment becomes the
/// empty remainder of its line. Idempotent.
std::string strip_comments(std::string_view src);

/// Same length as `src`: comments are blanked to spaces and literal bodies to
/// '_' (newlines kept in both), so byte offsets stay valid for a structural
/// scan that must ignore comment and literal contents.
std::string mask_comments_and_literals(std::string_view src);

enum class CommentStyle { Line, Block, Doxygen };

struct CommentBlock {
  std::string raw;   // exact bytes of [span_begin, span_end)
  std::string text;  // delimiter-free text
  CommentStyle style = CommentStyle::Line;
  std::size_t span_begin = 0;
  std::size_t span_end = 0;

  bool operator==(const CommentBlock&) const = default;
};

/// Collects comment blocks. Consecutive `//` comments that each start their
/// own line and sit on adjacent lines are merged into one block.
std::vector<CommentBlock> collect_comment_blocks(std::string_view src,
                                                 const std::vector<Segment>& segments);
std::vector<CommentBlock> collect_comment_blocks(std::string_view src);

/// Delimiter-free text of a raw comment (one or more `//` lines or a single
/// `/* */` block). Used for both original and generated comments.
std::string comment_text(std::string_view raw);

CommentStyle classify_comment_style(std::string_view raw);

std::string_view to_string(CommentStyle style);
CommentStyle comment_style_from_string(std::string_view s);

}  // namespace commentgen
