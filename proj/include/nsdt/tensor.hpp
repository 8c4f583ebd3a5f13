#pragma once

#include <cstdint>
#include <vector>

#ifdef NSDT_USE_BLAS
#include <cblas-openblas.h>
#endif

namespace nsdt {

// Row-major GEMM: C = alpha * op(A) * op(B) + beta * C.
// Dispatches to BLAS for float/double; the builtin kernel covers everything
// else (and builds without BLAS).
template <typename T>
void gemm_builtin(bool ta, bool tb, int64_t m, int64_t n, int64_t k, T alpha, const T* A,
                  int64_t lda, const T* B, int64_t ldb, T beta, T* C, int64_t ldc) {
  auto a_at = [&](int64_t i, int64_t p) { return ta ? A[p * lda + i] : A[i * lda + p]; };
  auto b_at = [&](int64_t p, int64_t j) { return tb ? B[j * ldb + p] : B[p * ldb + j]; };
  for (int64_t i = 0; i < m; ++i) {
    T* crow = C + i * ldc;
    if (beta == T(0)) {
      for (int64_t j = 0; j < n; ++j) crow[j] = T(0);
    } else if (beta != T(1)) {
      for (int64_t j = 0; j < n; ++j) crow[j] *= beta;
    }
    for (int64_t p = 0; p < k; ++p) {
      T av = alpha * a_at(i, p);
      if (av == T(0)) continue;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * b_at(p, j);
    }
  }
}

template <typename T>
void gemm(bool ta, bool tb, int64_t m, int64_t n, int64_t k, T alpha, const T* A, int64_t lda,
          const T* B, int64_t ldb, T beta, T* C, int64_t ldc) {
#ifdef NSDT_USE_BLAS
  if constexpr (std::is_same_v<T, float>) {
    cblas_sgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans,
                int(m), int(n), int(k), alpha, A, int(lda), B, int(ldb), beta, C, int(ldc));
    return;
  } else if constexpr (std::is_same_v<T, double>) {
    cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans,
                int(m), int(n), int(k), alpha, A, int(lda), B, int(ldb), beta, C, int(ldc));
    return;
  }
#endif
  gemm_builtin(ta, tb, m, n, k, alpha, A, lda, B, ldb, beta, C, ldc);
}

// Dense row-major buffer with an explicit 2-D view; higher-rank layouts are
// handled by the callers via flattening.
template <typename T>
struct Matrix {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<T> v;

  Matrix() = default;
  Matrix(int64_t r, int64_t c) : rows(r), cols(c), v(size_t(r * c), T(0)) {}

  T* data() { return v.data(); }
  const T* data() const { return v.data(); }
  T& at(int64_t r, int64_t c) { return v[size_t(r * cols + c)]; }
  const T& at(int64_t r, int64_t c) const { return v[size_t(r * cols + c)]; }
  int64_t numel() const { return rows * cols; }
  void zero() { std::fill(v.begin(), v.end(), T(0)); }
};

}  // namespace nsdt
