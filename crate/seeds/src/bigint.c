#include "rt.h"
#define W 8
typedef struct { u32 d[W]; } big;
void big_add(big *r, const big *a, const big *b) {
  u64 c = 0;
  for (int i = 0; i < W; i++) { c += (u64)a->d[i] + b->d[i]; r->d[i] = (u32)c; c >>= 32; }
}
void big_mul_small(big *r, const big *a, u32 m) {
  u64 c = 0;
  for (int i = 0; i < W; i++) { c += (u64)a->d[i] * m; r->d[i] = (u32)c; c >>= 32; }
}
int big_cmp(const big *a, const big *b) {
  for (int i = W - 1; i >= 0; i--) if (a->d[i] != b->d[i]) return a->d[i] < b->d[i] ? -1 : 1;
  return 0;
}
u64 mulmod(u64 a, u64 b, u64 m) {
  u64 r = 0; a %= m;
  while (b) { if (b & 1) r = (r + a) % m; a = (a << 1) % m; b >>= 1; }
  return r;
}
u64 powmod(u64 b, u64 e, u64 m) {
  u64 r = 1; b %= m;
  while (e) { if (e & 1) r = mulmod(r, b, m); b = mulmod(b, b, m); e >>= 1; }
  return r;
}
u64 gcd(u64 a, u64 b) { while (b) { u64 t = a % b; a = b; b = t; } return a; }
i64 sdiv64(i64 a, i64 b) { return b ? a / b : 0; }
u64 run(void) {
  big a = {{1}}, b;
  for (int i = 0; i < 20; i++) { big_mul_small(&b, &a, 3); big_add(&a, &a, &b); }
  return powmod(7, 1000003, 1000000007ull) + gcd(1071, 462) + big_cmp(&a, &b) + sdiv64(-100, 7) + a.d[1];
}
