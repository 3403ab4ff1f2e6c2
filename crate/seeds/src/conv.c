#include "rt.h"
float i2f(i32 x) { return (float)x; }
double u2d(u32 x) { return (double)x; }
float l2f(i64 x) { return (float)x; }
double ul2d(u64 x) { return (double)x; }
i32 f2i(float x) { return (i32)x; }
u32 d2u(double x) { return (u32)x; }
i64 d2l(double x) { return (i64)x; }
u64 f2ul(float x) { return (u64)x; }
float demote(double x) { return (float)x; }
double promote(float x) { return x; }
u32 fbits(float x) { union { float f; u32 u; } v = { x }; return v.u; }
double dfrom(u64 b) { union { u64 u; double d; } v = { b }; return v.d; }
i32 wrap(i64 x) { return (i32)x; }
u64 zext(u32 x) { return x; }
float truncf_(float x) { return __builtin_truncf(x); }
double nearest(double x) { return __builtin_rint(x); }
float ceilf_(float x) { return __builtin_ceilf(x); }
double sqrt_(double x) { return __builtin_sqrt(x); }
double run(void) {
  return i2f(-7) + u2d(4000000000u) + l2f(-(1ll << 40)) + ul2d(~0ull) + f2i(-3.75f) + d2u(3e9) + d2l(-1e12)
    + f2ul(1e10f) + demote(1e-40) + promote(0.1f) + fbits(1.0f) + dfrom(0x3ff0000000000000ull)
    + wrap(0x1234567890ll) + zext(0xffffffffu) + truncf_(-2.7f) + nearest(2.5) + ceilf_(1.1f) + sqrt_(2);
}
