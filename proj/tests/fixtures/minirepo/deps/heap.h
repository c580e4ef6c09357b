#ifndef HEAP_H
#define HEAP_H

struct heap_node {
  struct heap_node *left;
  struct heap_node *right;
  struct heap_node *parent;
};

struct heap {
  struct heap_node *min;
  unsigned int nelts;
};

static inline struct heap_node *heap_min(const struct heap *h) { return h->min; }

#endif
