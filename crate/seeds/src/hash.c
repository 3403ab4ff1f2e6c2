#include "rt.h"
u32 fnv1a(const unsigned char *p, u32 n) {
  u32 h = 2166136261u;
  for (u32 i = 0; i < n; i++) { h ^= p[i]; h *= 16777619u; }
  return h;
}
u64 fnv1a64(const unsigned char *p, u32 n) {
  u64 h = 1469598103934665603ull;
  for (u32 i = 0; i < n; i++) { h ^= p[i]; h *= 1099511628211ull; }
  return h;
}
u32 murmur_mix(u32 k) {
  k ^= k >> 16; k *= 0x85ebca6b; k ^= k >> 13; k *= 0xc2b2ae35; k ^= k >> 16;
  return k;
}
u64 splitmix(u64 x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}
u32 rotl(u32 x, int r) { return (x << r) | (x >> (32 - r)); }
u64 rotr64(u64 x, int r) { return (x >> r) | (x << (64 - r)); }
static unsigned char buf[256];
u32 run(void) {
  for (int i = 0; i < 256; i++) buf[i] = (unsigned char)murmur_mix(i);
  return fnv1a(buf, 256) ^ (u32)fnv1a64(buf, 200) ^ rotl(7, 3) ^ (u32)rotr64(splitmix(3), 11);
}
