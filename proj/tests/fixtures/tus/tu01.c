struct node { int key; struct node *next; };

/* Pushes key onto the list head. */
struct node *push(struct node *head, struct node *n, int key) {
  n->key = key;
  n->next = head;
  return n;
}

int length(const struct node *n) {
  int count = 0;
  while (n) {
    ++count;
    n = n->next;
  }
  return count;
}

int sum(const struct node *n) {
  int total = 0;
  for (; n; n = n->next) total += n->key;
  return total + length(n);
}
