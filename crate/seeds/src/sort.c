#include "rt.h"
void insertion_sort(i32 *a, int n) {
  for (int i = 1; i < n; i++) {
    i32 v = a[i]; int j = i - 1;
    while (j >= 0 && a[j] > v) { a[j + 1] = a[j]; j--; }
    a[j + 1] = v;
  }
}
static void swap(i32 *a, i32 *b) { i32 t = *a; *a = *b; *b = t; }
void quick_sort(i32 *a, int lo, int hi) {
  if (lo >= hi) return;
  i32 p = a[(lo + hi) / 2]; int i = lo, j = hi;
  while (i <= j) {
    while (a[i] < p) i++;
    while (a[j] > p) j--;
    if (i <= j) { swap(&a[i], &a[j]); i++; j--; }
  }
  quick_sort(a, lo, j); quick_sort(a, i, hi);
}
int binary_search(const i32 *a, int n, i32 key) {
  int lo = 0, hi = n - 1;
  while (lo <= hi) {
    int mid = lo + (hi - lo) / 2;
    if (a[mid] == key) return mid;
    if (a[mid] < key) lo = mid + 1; else hi = mid - 1;
  }
  return -1;
}
static i32 data[64];
i32 run(void) {
  u32 s = 12345;
  for (int i = 0; i < 64; i++) { s = s * 1103515245u + 12345u; data[i] = (i32)(s >> 8) % 1000; }
  quick_sort(data, 0, 63);
  insertion_sort(data, 64);
  return binary_search(data, 64, data[17]) + data[0] - data[63];
}
