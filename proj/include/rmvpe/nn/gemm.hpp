#ifndef RMVPE_NN_GEMM_HPP
#define RMVPE_NN_GEMM_HPP

#include <cstdint>
#include <vector>

namespace rmvpe::nn {

// C[M,N] += A[M,K] * B[K,N], all row-major.
//
// The k-loop is outer so every C element accumulates in a fixed sequential
// order (bit-reproducible), while the unit-stride j-loop vectorizes.
template <typename T>
void gemm_acc(std::int64_t m, std::int64_t n, std::int64_t k, const T* a,
              const T* b, T* c) {
  for (std::int64_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    const T* arow = a + i * k;
    for (std::int64_t p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T(0)) continue;
      const T* brow = b + p * n;
      for (std::int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void transpose(std::int64_t rows, std::int64_t cols, const T* src, T* dst) {
  constexpr std::int64_t kBlock = 32;
  for (std::int64_t i0 = 0; i0 < rows; i0 += kBlock)
    for (std::int64_t j0 = 0; j0 < cols; j0 += kBlock) {
      const std::int64_t i1 = std::min(i0 + kBlock, rows);
      const std::int64_t j1 = std::min(j0 + kBlock, cols);
      for (std::int64_t i = i0; i < i1; ++i)
        for (std::int64_t j = j0; j < j1; ++j) dst[j * rows + i] = src[i * cols + j];
    }
}

// Reusable scratch buffers for im2col/transpose workspaces. Single-writer
// per thread; layers never nest GEMM calls.
template <typename T>
std::vector<T>& scratch(int which) {
  thread_local std::vector<T> bufs[3];
  return bufs[which];
}

}  // namespace rmvpe::nn

#endif  // RMVPE_NN_GEMM_HPP
