#include "rt.h"
typedef i32 (*binop)(i32, i32);
static i32 add(i32 a, i32 b) { return a + b; }
static i32 sub(i32 a, i32 b) { return a - b; }
static i32 mul(i32 a, i32 b) { return a * b; }
static i32 dv(i32 a, i32 b) { return b ? a / b : 0; }
static i32 rem(i32 a, i32 b) { return b ? a % b : 0; }
static i32 shl(i32 a, i32 b) { return a << (b & 31); }
static binop ops[] = { add, sub, mul, dv, rem, shl };
i32 apply(int op, i32 a, i32 b) { return ops[op % 6](a, b); }
i32 calc(int code, i32 a, i32 b) {
  switch (code) {
  case 0: return a + b;
  case 1: return a - b;
  case 2: return a * b;
  case 3: return a & b;
  case 4: return a | b;
  case 5: return a ^ b;
  case 6: return (u32)a >> (b & 31);
  case 7: return a >> (b & 31);
  case 8: return a < b;
  case 9: return (u32)a < (u32)b;
  default: return -1;
  }
}
typedef double (*unop)(double);
static double twice(double x) { return 2 * x; }
static double sq(double x) { return x * x; }
double apply_d(unop f, double x) { return f(f(x)); }
i32 run(void) {
  i32 acc = 0;
  for (int i = 0; i < 12; i++) acc += apply(i, acc + 7, i + 1) + calc(i, acc, 3);
  return acc + (i32)apply_d(acc & 1 ? twice : sq, 1.5);
}
