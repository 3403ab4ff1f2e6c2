typedef unsigned int u32;
typedef unsigned long long u64;
typedef int i32;
typedef long long i64;
typedef unsigned long size_t;

void *memcpy(void *d, const void *s, size_t n);
void *memset(void *d, int c, size_t n);
