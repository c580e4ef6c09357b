namespace geo {

struct Point {
  int x;
  int y;
};

class Box {
 public:
  Box(Point lo, Point hi) : lo_(lo), hi_(hi) {}
  bool contains(Point p) const {
    return p.x >= lo_.x && p.x < hi_.x && p.y >= lo_.y && p.y < hi_.y;
  }
  int area() const { return (hi_.x - lo_.x) * (hi_.y - lo_.y); }

 private:
  Point lo_;
  Point hi_;
};

int count_inside(const Box& b, const Point* pts, int n) {
  int c = 0;
  for (int i = 0; i < n; ++i)
    if (b.contains(pts[i])) ++c;
  return c;
}

}  // namespace geo
