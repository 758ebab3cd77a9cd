#include <immintrin.h>

#include <limits>

#include "persist/kernels.hpp"

namespace persist::kernels::avx2 {

__attribute__((target("avx2"))) void polytope_inside(const PolytopeView& P, const double* const* s,
                                                     std::size_t count, double k, std::uint8_t* inside) {
  const __m256d vk = _mm256_set1_pd(k);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t p = 0;
  for (; p + 4 <= count; p += 4) {
    __m256d h = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    for (int r = 0; r < P.m; ++r) {
      const double* a = P.a + static_cast<std::size_t>(r) * P.d;
      __m256d acc = _mm256_mul_pd(_mm256_set1_pd(a[0]), _mm256_loadu_pd(s[0] + p));
      for (int j = 1; j < P.d; ++j)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(a[j]), _mm256_loadu_pd(s[j] + p)));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(P.b[r]), vk));
      h = _mm256_max_pd(acc, h);
    }
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(h, zero, _CMP_LE_OQ));
    for (int l = 0; l < 4; ++l) inside[p + static_cast<std::size_t>(l)] = (mask >> l) & 1;
  }
  if (p < count) {
    const double* tail[16];
    for (int j = 0; j < P.d && j < 16; ++j) tail[j] = s[j] + p;
    scalar::polytope_inside(P, tail, count - p, k, inside + p);
  }
}

__attribute__((target("avx2"))) void ball_inside(const BallView& B, const double* const* s, std::size_t count,
                                                 double k, std::uint8_t* inside) {
  const double lim_s = (k * B.rho) * (k * B.rho);
  const __m256d lim = _mm256_set1_pd(lim_s);
  std::size_t p = 0;
  for (; p + 4 <= count; p += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (int j = 0; j < B.d; ++j) {
      const __m256d t = _mm256_sub_pd(_mm256_loadu_pd(s[j] + p), _mm256_set1_pd(k * B.c[j]));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(t, t));
    }
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(acc, lim, _CMP_LE_OQ));
    for (int l = 0; l < 4; ++l) inside[p + static_cast<std::size_t>(l)] = (mask >> l) & 1;
  }
  if (p < count) {
    const double* tail[16];
    for (int j = 0; j < B.d && j < 16; ++j) tail[j] = s[j] + p;
    scalar::ball_inside(B, tail, count - p, k, inside + p);
  }
}

}  // namespace persist::kernels::avx2
