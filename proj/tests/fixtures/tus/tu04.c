struct vec { double x, y, z; };

double dot(struct vec a, struct vec b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

struct vec scale(struct vec a, double s) {
  struct vec r;
  r.x = a.x * s;
  r.y = a.y * s;
  r.z = a.z * s;
  return r;
}

struct vec project(struct vec a, struct vec onto) {
  double d = dot(onto, onto);
  if (d == 0.0) return onto;
  return scale(onto, dot(a, onto) / d);
}
