#include "rt.h"
static unsigned char heap[4096];
static u32 top;
void *bump(u32 n) { u32 p = (top + 7) & ~7u; if (p + n > sizeof heap) return 0; top = p + n; return heap + p; }
void reset(void) { top = 0; }
typedef struct node { i32 v; struct node *next; } node;
node *push(node *head, i32 v) { node *n = bump(sizeof *n); if (!n) return head; n->v = v; n->next = head; return n; }
i32 list_sum(const node *n) { i32 s = 0; for (; n; n = n->next) s += n->v; return s; }
node *list_rev(node *n) { node *p = 0; while (n) { node *x = n->next; n->next = p; p = n; n = x; } return p; }
u64 load_u64(const unsigned char *p) { u64 v; memcpy(&v, p, 8); return v; }
void store_u16(unsigned char *p, unsigned short v) { memcpy(p, &v, 2); }
signed char sext8(int x) { return (signed char)x; }
short sext16(int x) { return (short)x; }
i64 sext32(i32 x) { return x; }
typedef struct { double a; float b; int c; char d[12]; } rec;
rec copy_rec(const rec *r) { rec t = *r; t.c++; return t; }
i32 run(void) {
  reset();
  node *h = 0;
  for (int i = 0; i < 40; i++) h = push(h, i * i);
  h = list_rev(h);
  unsigned char b[16]; memset(b, 0xab, 16); store_u16(b + 3, 0x1234);
  rec r = { 1.5, 2.5f, 3, "hello" }; rec s = copy_rec(&r);
  return list_sum(h) + (i32)load_u64(b) + sext8(200) + sext16(70000) + (i32)sext32(-5) + s.c + s.d[1];
}
