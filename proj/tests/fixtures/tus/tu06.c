int fib(int n) {
  if (n < 2) return n;
  return fib(n - 1) + fib(n - 2);
}

int gcd(int a, int b) {
  while (b != 0) {
    int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

int lcm(int a, int b) { return a / gcd(a, b) * b; }
