#include "rt.h"
int classify(int x) {
  if (x < 0) return -1;
  else if (x == 0) return 0;
  else if (x < 10) return 1;
  else if (x < 100) return 2;
  return 3;
}
int nested(int n) {
  int c = 0;
  for (int i = 0; i < n; i++) {
    for (int j = 0; j < n; j++) {
      if ((i ^ j) & 1) continue;
      if (i * j > 50) break;
      c += i * j;
    }
  }
  return c;
}
int gotoish(int x) {
  int s = 0;
again:
  s += x;
  if (--x > 0) goto again;
  return s;
}
int select_max(int a, int b, int c) { int m = a > b ? a : b; return m > c ? m : c; }
u32 gray(u32 x) { return x ^ (x >> 1); }
u32 ungray(u32 g) { for (u32 m = g >> 1; m; m >>= 1) g ^= m; return g; }
int ackermann(int m, int n) {
  if (m == 0) return n + 1;
  if (n == 0) return ackermann(m - 1, 1);
  return ackermann(m - 1, ackermann(m, n - 1));
}
int run(void) {
  return classify(-4) + classify(55) + nested(12) + gotoish(9) + select_max(3, 9, 4)
    + (int)ungray(gray(77)) + ackermann(2, 3);
}
