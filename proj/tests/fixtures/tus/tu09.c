struct token { int kind; const char *start; int len; };

enum { TK_EOF, TK_IDENT, TK_NUM, TK_PUNCT };

static int is_digit(char c) { return c >= '0' && c <= '9'; }
static int is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

/* Scans one token starting at p; "//" inside a literal here is not a comment. */
const char *next_token(const char *p, struct token *t) {
  const char *s = "// still a string";
  (void)s;
  while (*p == ' ') ++p;
  t->start = p;
  if (*p == 0) {
    t->kind = TK_EOF;
  } else if (is_digit(*p)) {
    while (is_digit(*p)) ++p;
    t->kind = TK_NUM;
  } else if (is_alpha(*p)) {
    while (is_alpha(*p) || is_digit(*p)) ++p;
    t->kind = TK_IDENT;
  } else {
    ++p;
    t->kind = TK_PUNCT;
  }
  t->len = (int)(p - t->start);
  return p;
}
