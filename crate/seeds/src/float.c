#include "rt.h"
double my_sqrt(double x) {
  if (x <= 0) return 0;
  double g = x;
  for (int i = 0; i < 20; i++) g = 0.5 * (g + x / g);
  return g;
}
float fast_inv_sqrt(float x) {
  union { float f; u32 i; } u = { x };
  u.i = 0x5f3759df - (u.i >> 1);
  return u.f * (1.5f - 0.5f * x * u.f * u.f);
}
double sin_taylor(double x) {
  double term = x, sum = x;
  for (int n = 1; n < 10; n++) { term *= -x * x / ((2 * n) * (2 * n + 1)); sum += term; }
  return sum;
}
float lerp(float a, float b, float t) { return a + (b - a) * t; }
double poly(double x) { return ((3.5 * x - 2.25) * x + 1.125) * x - 0.0625; }
int to_int(double x) { return (int)x; }
long long to_i64(float x) { return (long long)x; }
double from_u64(u64 x) { return (double)x; }
float absf(float x) { return __builtin_fabsf(x); }
double floor_d(double x) { return __builtin_floor(x); }
double copysign_d(double a, double b) { return __builtin_copysign(a, b); }
float minf(float a, float b) { return a < b ? a : b; }
double run(void) {
  return my_sqrt(2.0) + fast_inv_sqrt(4.0f) + sin_taylor(0.5) + lerp(1, 3, 0.25f) + poly(1.5)
    + to_int(3.9) + to_i64(-2.5f) + from_u64(1ull << 63) + absf(-1.5f) + floor_d(-2.5)
    + copysign_d(3.0, -1.0) + minf(2.0f, 1.0f);
}
