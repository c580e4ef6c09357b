enum color { RED, GREEN, BLUE };

static const char *names[] = {"red", "green", "blue"};

// Maps a color to its lower-case name.
const char *color_name(enum color c) {
  if (c < RED || c > BLUE) return "?";
  return names[c];
}

int is_warm(enum color c) { return c == RED; }
