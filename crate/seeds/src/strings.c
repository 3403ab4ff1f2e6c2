#include "rt.h"
size_t my_strlen(const char *s) { size_t n = 0; while (s[n]) n++; return n; }
int my_strcmp(const char *a, const char *b) {
  while (*a && *a == *b) { a++; b++; }
  return (unsigned char)*a - (unsigned char)*b;
}
void reverse(char *s) {
  size_t n = my_strlen(s);
  for (size_t i = 0; i < n / 2; i++) { char t = s[i]; s[i] = s[n - 1 - i]; s[n - 1 - i] = t; }
}
int atoi_simple(const char *s) {
  int sign = 1, v = 0;
  if (*s == '-') { sign = -1; s++; }
  while (*s >= '0' && *s <= '9') v = v * 10 + (*s++ - '0');
  return sign * v;
}
int itoa_simple(int v, char *out) {
  char tmp[16]; int n = 0, neg = v < 0; unsigned u = neg ? -(unsigned)v : v;
  do { tmp[n++] = '0' + u % 10; u /= 10; } while (u);
  int k = 0; if (neg) out[k++] = '-';
  while (n) out[k++] = tmp[--n];
  out[k] = 0; return k;
}
int count_char(const char *s, char c) { int n = 0; for (; *s; s++) n += *s == c; return n; }
void to_upper(char *s) { for (; *s; s++) if (*s >= 'a' && *s <= 'z') *s -= 32; }
static char buf[64];
int run(void) {
  int k = itoa_simple(-90210, buf);
  reverse(buf); to_upper(buf);
  return k + atoi_simple("-417") + my_strcmp("abc", "abd") + count_char("banana", 'a');
}
