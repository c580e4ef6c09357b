typedef unsigned int u32;

u32 rotl(u32 x, int r) { return (x << r) | (x >> (32 - r)); }

/* FNV-style mix of a byte buffer. */
u32 mix(const unsigned char *p, int n) {
  u32 h = 2166136261u;
  int i;
  for (i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 16777619u;
    h = rotl(h, 5);
  }
  return h;
}
