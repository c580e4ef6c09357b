struct matrix { int rows; int cols; double cells[64]; };

double get(const struct matrix *m, int r, int c) { return m->cells[r * m->cols + c]; }
void set(struct matrix *m, int r, int c, double v) { m->cells[r * m->cols + c] = v; }

/* Naive O(n^3) product; a and b must be compatible. */
int multiply(const struct matrix *a, const struct matrix *b, struct matrix *out) {
  int i, j, k;
  if (a->cols != b->rows) return -1;
  out->rows = a->rows;
  out->cols = b->cols;
  for (i = 0; i < a->rows; ++i)
    for (j = 0; j < b->cols; ++j) {
      double acc = 0;
      for (k = 0; k < a->cols; ++k) acc += get(a, i, k) * get(b, k, j);
      set(out, i, j, acc);
    }
  return 0;
}
