#include "rt.h"
typedef struct { int x, y; int vx, vy; } particle;
static particle ps[16];
static int tick_count;
void step(void) {
  for (int i = 0; i < 16; i++) {
    particle *p = &ps[i];
    p->x += p->vx; p->y += p->vy;
    if (p->x < 0 || p->x > 1000) p->vx = -p->vx;
    if (p->y < 0 || p->y > 1000) p->vy = -p->vy;
  }
  tick_count++;
}
int lexer(const char *s) {
  enum { START, NUM, IDENT } st = START;
  int tokens = 0;
  for (; *s; s++) {
    char c = *s;
    switch (st) {
    case START:
      if (c >= '0' && c <= '9') st = NUM;
      else if (c >= 'a' && c <= 'z') st = IDENT;
      break;
    case NUM: if (!(c >= '0' && c <= '9')) { tokens++; st = START; } break;
    case IDENT: if (!(c >= 'a' && c <= 'z')) { tokens++; st = START; } break;
    }
  }
  return tokens + (st != START);
}
u32 collatz(u32 n) { u32 s = 0; while (n != 1) { n = n & 1 ? 3 * n + 1 : n / 2; s++; } return s; }
int fib(int n) { return n < 2 ? n : fib(n - 1) + fib(n - 2); }
int fact(int n) { int r = 1; while (n > 1) r *= n--; return r; }
int run(void) {
  for (int i = 0; i < 16; i++) { ps[i].x = i * 60; ps[i].y = i * 30; ps[i].vx = i - 8; ps[i].vy = 3 - i; }
  for (int t = 0; t < 50; t++) step();
  return ps[5].x + lexer("a1 + bb22 * (c3)") + collatz(27) + fib(10) + fact(6) + tick_count;
}
