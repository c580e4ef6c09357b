struct ring { int buf[16]; int head; int tail; };

static int ring_full(const struct ring *r) { return ((r->head + 1) & 15) == r->tail; }
static int ring_empty(const struct ring *r) { return r->head == r->tail; }

int ring_push(struct ring *r, int v) {
  if (ring_full(r)) return -1;
  r->buf[r->head] = v;
  r->head = (r->head + 1) & 15;
  return 0;
}

int ring_pop(struct ring *r, int *out) {
  if (ring_empty(r)) return -1;
  *out = r->buf[r->tail];
  r->tail = (r->tail + 1) & 15;
  return 0;
}
