#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

// Dense kernels behind the transformer. Every parallel loop assigns each
// output element to exactly one iteration with a serial inner accumulation,
// so results are bitwise identical to the serial reference for any thread
// count. kernels::serial holds the plain-loop reference used by the tests
// and the benchmark.

namespace phonemt::kernels {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

// c[m,n] = a[m,k] * b[k,n]
template <typename T>
void matmul_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
}

// c[m,n] = a[k,m]^T * b[k,n]
template <typename T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[p * n + j];
      c[i * n + j] = acc;
    }
}

// c[m,n] = a[m,k] * b[n,k]^T
template <typename T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
      c[i * n + j] = acc;
    }
}

template <typename T>
void add_bias_rows(T* x, const T* bias, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) x[i * cols + j] += bias[j];
}

template <typename T>
void relu(const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const T* x, const T* dy, T* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

// Row-wise softmax with an optional additive mask (e.g. -1e9 on padded or
// future positions). Numerically stabilized by the row maximum.
template <typename T>
void softmax_rows(const T* x, const T* mask, T* y, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const T* xi = x + i * cols;
    const T* mi = mask ? mask + i * cols : nullptr;
    T* yi = y + i * cols;
    T mx = xi[0] + (mi ? mi[0] : T(0));
    for (std::size_t j = 1; j < cols; ++j) {
      const T v = xi[j] + (mi ? mi[j] : T(0));
      if (v > mx) mx = v;
    }
    T sum = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      const T v = std::exp(xi[j] + (mi ? mi[j] : T(0)) - mx);
      yi[j] = v;
      sum += v;
    }
    const T inv = T(1) / sum;
    for (std::size_t j = 0; j < cols; ++j) yi[j] *= inv;
  }
}

// dx = (dy - sum(dy*y)) * y, row-wise.
template <typename T>
void softmax_backward_rows(const T* y, const T* dy, T* dx, std::size_t rows,
                           std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const T* yi = y + i * cols;
    const T* di = dy + i * cols;
    T* oi = dx + i * cols;
    T dot = 0;
    for (std::size_t j = 0; j < cols; ++j) dot += di[j] * yi[j];
    for (std::size_t j = 0; j < cols; ++j) oi[j] = (di[j] - dot) * yi[j];
  }
}

// y = gamma * (x - mean) / sqrt(var + eps) + beta, per row; saves the
// normalized values and inverse stddev for the backward pass.
template <typename T>
void layernorm(const T* x, const T* gamma, const T* beta, T* y, T* x_hat, T* inv_std,
               std::size_t rows, std::size_t cols, T eps) {
  for (std::size_t i = 0; i < rows; ++i) {
    const T* xi = x + i * cols;
    T mean = 0;
    for (std::size_t j = 0; j < cols; ++j) mean += xi[j];
    mean /= static_cast<T>(cols);
    T var = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      const T d = xi[j] - mean;
      var += d * d;
    }
    var /= static_cast<T>(cols);
    const T istd = T(1) / std::sqrt(var + eps);
    inv_std[i] = istd;
    for (std::size_t j = 0; j < cols; ++j) {
      const T xh = (xi[j] - mean) * istd;
      x_hat[i * cols + j] = xh;
      y[i * cols + j] = gamma[j] * xh + beta[j];
    }
  }
}

template <typename T>
void layernorm_backward(const T* x_hat, const T* inv_std, const T* gamma, const T* dy,
                        T* dx, T* dgamma, T* dbeta, std::size_t rows, std::size_t cols) {
  for (std::size_t j = 0; j < cols; ++j) {
    T dg = 0, db = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      dg += dy[i * cols + j] * x_hat[i * cols + j];
      db += dy[i * cols + j];
    }
    dgamma[j] += dg;
    dbeta[j] += db;
  }
  const T inv_cols = T(1) / static_cast<T>(cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const T* xh = x_hat + i * cols;
    const T* di = dy + i * cols;
    T* oi = dx + i * cols;
    T sum_g = 0, sum_gx = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      const T g = di[j] * gamma[j];
      sum_g += g;
      sum_gx += g * xh[j];
    }
    for (std::size_t j = 0; j < cols; ++j) {
      const T g = di[j] * gamma[j];
      oi[j] = inv_std[i] * (g - inv_cols * (sum_g + xh[j] * sum_gx));
    }
  }
}

// y[i,:] = table[ids[i],:] * scale
template <typename T>
void embedding_gather(const T* table, const std::int32_t* ids, T* y, std::size_t rows,
                      std::size_t dim, T scale) {
  for (std::size_t i = 0; i < rows; ++i) {
    const T* src = table + static_cast<std::size_t>(ids[i]) * dim;
    for (std::size_t j = 0; j < dim; ++j) y[i * dim + j] = src[j] * scale;
  }
}

}  // namespace serial

template <typename T>
void matmul_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
}

template <typename T>
void matmul_tn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[p * n + j];
      c[i * n + j] = acc;
    }
}

template <typename T>
void matmul_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
      c[i * n + j] = acc;
    }
}

template <typename T>
void add_bias_rows(T* x, const T* bias, std::size_t rows, std::size_t cols) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) x[i * cols + j] += bias[j];
}

template <typename T>
void relu(const T* x, T* y, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(const T* x, const T* dy, T* dx, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

template <typename T>
void softmax_rows(const T* x, const T* mask, T* y, std::size_t rows, std::size_t cols) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < rows; ++i)
    serial::softmax_rows(x + i * cols, mask ? mask + i * cols : nullptr, y + i * cols, 1,
                         cols);
}

template <typename T>
void softmax_backward_rows(const T* y, const T* dy, T* dx, std::size_t rows,
                           std::size_t cols) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < rows; ++i)
    serial::softmax_backward_rows(y + i * cols, dy + i * cols, dx + i * cols, 1, cols);
}

template <typename T>
void layernorm(const T* x, const T* gamma, const T* beta, T* y, T* x_hat, T* inv_std,
               std::size_t rows, std::size_t cols, T eps) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < rows; ++i)
    serial::layernorm(x + i * cols, gamma, beta, y + i * cols, x_hat + i * cols,
                      inv_std + i, 1, cols, eps);
}

// dgamma/dbeta accumulate over rows: the column loop is the parallel one so
// each accumulator is owned by a single thread.
template <typename T>
void layernorm_backward(const T* x_hat, const T* inv_std, const T* gamma, const T* dy,
                        T* dx, T* dgamma, T* dbeta, std::size_t rows, std::size_t cols) {
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < cols; ++j) {
    T dg = 0, db = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      dg += dy[i * cols + j] * x_hat[i * cols + j];
      db += dy[i * cols + j];
    }
    dgamma[j] += dg;
    dbeta[j] += db;
  }
  const T inv_cols = T(1) / static_cast<T>(cols);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < rows; ++i) {
    const T* xh = x_hat + i * cols;
    const T* di = dy + i * cols;
    T* oi = dx + i * cols;
    T sum_g = 0, sum_gx = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      const T g = di[j] * gamma[j];
      sum_g += g;
      sum_gx += g * xh[j];
    }
    for (std::size_t j = 0; j < cols; ++j) {
      const T g = di[j] * gamma[j];
      oi[j] = inv_std[i] * (g - inv_cols * (sum_g + xh[j] * sum_gx));
    }
  }
}

template <typename T>
void embedding_gather(const T* table, const std::int32_t* ids, T* y, std::size_t rows,
                      std::size_t dim, T scale) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < rows; ++i) {
    const T* src = table + static_cast<std::size_t>(ids[i]) * dim;
    for (std::size_t j = 0; j < dim; ++j) y[i * dim + j] = src[j] * scale;
  }
}

// Serial on purpose: several positions may hit the same table row, so a
// parallel version would race (or need per-thread copies not worth it at
// this scale).
template <typename T>
void embedding_scatter_add(T* dtable, const std::int32_t* ids, const T* dy,
                           std::size_t rows, std::size_t dim, T scale) {
  for (std::size_t i = 0; i < rows; ++i) {
    T* dst = dtable + static_cast<std::size_t>(ids[i]) * dim;
    for (std::size_t j = 0; j < dim; ++j) dst[j] += dy[i * dim + j] * scale;
  }
}

// [batch*len, heads*dh] -> [batch, heads, len, dh]
template <typename T>
void split_heads(const T* x, T* y, std::size_t batch, std::size_t len, std::size_t heads,
                 std::size_t dh) {
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t l = 0; l < len; ++l)
        for (std::size_t d = 0; d < dh; ++d)
          y[((b * heads + h) * len + l) * dh + d] =
              x[(b * len + l) * heads * dh + h * dh + d];
}

// [batch, heads, len, dh] -> [batch*len, heads*dh]
template <typename T>
void merge_heads(const T* x, T* y, std::size_t batch, std::size_t len, std::size_t heads,
                 std::size_t dh) {
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t l = 0; l < len; ++l)
      for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t d = 0; d < dh; ++d)
          y[(b * len + l) * heads * dh + h * dh + d] =
              x[((b * heads + h) * len + l) * dh + d];
}

// bias_grad[j] += sum_i dy[i,j]
template <typename T>
void col_sums_accum(const T* dy, T* bias_grad, std::size_t rows, std::size_t cols) {
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < cols; ++j) {
    T acc = 0;
    for (std::size_t i = 0; i < rows; ++i) acc += dy[i * cols + j];
    bias_grad[j] += acc;
  }
}

template <typename T>
void add_inplace(T* dst, const T* src, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) dst[i] += src[i];
}

template <typename T>
void mul_inplace(T* dst, const T* src, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) dst[i] *= src[i];
}

}  // namespace phonemt::kernels
