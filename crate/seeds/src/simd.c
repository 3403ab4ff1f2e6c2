#include "rt.h"
#ifdef __wasm_simd128__
#include <wasm_simd128.h>
v128_t vadd(v128_t a, v128_t b) { return wasm_i32x4_add(a, b); }
v128_t vmix(v128_t a, v128_t b) {
  v128_t s = wasm_i8x16_shuffle(a, b, 0, 17, 2, 19, 4, 21, 6, 23, 8, 25, 10, 27, 12, 29, 14, 31);
  return wasm_v128_xor(wasm_i16x8_mul(s, b), wasm_u8x16_avgr(a, s));
}
v128_t vshift(v128_t a, int n) { return wasm_i8x16_shl(a, n); }
float hsum(v128_t v) {
  return wasm_f32x4_extract_lane(v, 0) + wasm_f32x4_extract_lane(v, 1)
    + wasm_f32x4_extract_lane(v, 2) + wasm_f32x4_extract_lane(v, 3);
}
v128_t vminmax(v128_t a, v128_t b) { return wasm_f64x2_add(wasm_f64x2_min(a, b), wasm_f64x2_max(a, b)); }
int vany(v128_t a) { return wasm_v128_any_true(a) + wasm_i32x4_all_true(a) + wasm_i8x16_bitmask(a); }
v128_t vconv(v128_t a) { return wasm_f32x4_convert_i32x4(wasm_i32x4_abs(a)); }
v128_t vsat(v128_t a, v128_t b) { return wasm_i8x16_add_sat(wasm_u8x16_sub_sat(a, b), wasm_i8x16_narrow_i16x8(a, b)); }
v128_t vext(v128_t a) { return wasm_i32x4_extmul_low_i16x8(a, a); }
v128_t vsel(v128_t a, v128_t b, v128_t m) { return wasm_v128_bitselect(a, b, wasm_i32x4_gt(m, a)); }
#endif
void scale(float *v, float k, int n) { for (int i = 0; i < n; i++) v[i] *= k; }
int sum_bytes(const unsigned char *p, int n) { int s = 0; for (int i = 0; i < n; i++) s += p[i]; return s; }
void clamp16(short *v, int n) { for (int i = 0; i < n; i++) v[i] = v[i] > 100 ? 100 : (v[i] < -100 ? -100 : v[i]); }
static float fv[32];
static unsigned char bv[64];
static short sv[32];
int run(void) {
  for (int i = 0; i < 32; i++) { fv[i] = i * 0.5f; sv[i] = (short)(i * 37 - 500); }
  for (int i = 0; i < 64; i++) bv[i] = (unsigned char)(i * 7);
  scale(fv, 1.5f, 32); clamp16(sv, 32);
  int r = sum_bytes(bv, 64) + (int)fv[9] + sv[3];
#ifdef __wasm_simd128__
  v128_t a = wasm_i32x4_make(1, 2, 3, 4), b = wasm_i32x4_splat(7);
  r += wasm_i32x4_extract_lane(vshift(vmix(vadd(a, b), b), 3), 2) + vany(a) + (int)hsum(vconv(a));
  r += wasm_i32x4_extract_lane(vsat(vext(a), vsel(a, b, a)), 1);
  r += (int)wasm_f64x2_extract_lane(vminmax(wasm_f64x2_splat(1.5), wasm_f64x2_splat(-2.0)), 0);
#endif
  return r;
}
