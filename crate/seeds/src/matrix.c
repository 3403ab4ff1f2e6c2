#include "rt.h"
#define N 8
static float A[N][N], B[N][N], C[N][N];
void matmul(void) {
  for (int i = 0; i < N; i++)
    for (int j = 0; j < N; j++) {
      float s = 0;
      for (int k = 0; k < N; k++) s += A[i][k] * B[k][j];
      C[i][j] = s;
    }
}
void transpose(float m[N][N]) {
  for (int i = 0; i < N; i++)
    for (int j = i + 1; j < N; j++) { float t = m[i][j]; m[i][j] = m[j][i]; m[j][i] = t; }
}
double dot(const double *a, const double *b, int n) {
  double s = 0; for (int i = 0; i < n; i++) s += a[i] * b[i]; return s;
}
void saxpy(float a, const float *x, float *y, int n) { for (int i = 0; i < n; i++) y[i] += a * x[i]; }
int add_arrays(i32 *d, const i32 *a, const i32 *b, int n) {
  for (int i = 0; i < n; i++) d[i] = a[i] + b[i];
  return d[n - 1];
}
float run(void) {
  for (int i = 0; i < N; i++) for (int j = 0; j < N; j++) { A[i][j] = i + j; B[i][j] = i - j; }
  matmul(); transpose(C);
  saxpy(2.0f, A[0], C[0], N);
  return C[3][4] + C[0][0];
}
