#include "rt.h"
static u32 table[256];
void crc_init(void) {
  for (u32 i = 0; i < 256; i++) {
    u32 c = i;
    for (int k = 0; k < 8; k++) c = c & 1 ? 0xedb88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
}
u32 crc32(const unsigned char *p, u32 n) {
  u32 c = 0xffffffffu;
  while (n--) c = table[(c ^ *p++) & 0xff] ^ (c >> 8);
  return c ^ 0xffffffffu;
}
u32 adler32(const unsigned char *p, u32 n) {
  u32 a = 1, b = 0;
  for (u32 i = 0; i < n; i++) { a = (a + p[i]) % 65521; b = (b + a) % 65521; }
  return (b << 16) | a;
}
int popcount(u64 x) { int c = 0; while (x) { x &= x - 1; c++; } return c; }
int clz32(u32 x) { return x ? __builtin_clz(x) : 32; }
int ctz64(u64 x) { return x ? __builtin_ctzll(x) : 64; }
u32 run(void) {
  static unsigned char msg[] = "the quick brown fox jumps over the lazy dog";
  crc_init();
  return crc32(msg, sizeof msg - 1) + adler32(msg, sizeof msg - 1) + popcount(0xf0f0f0f0f0ull)
    + clz32(1234) + ctz64(1ull << 40);
}
