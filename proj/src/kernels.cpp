#include "mlgan/kernels.hpp"

#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mlgan::kernels {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

inline double sign(double v) { return (v > 0.0) - (v < 0.0); }

inline double sqdist(const double* x, const double* y, std::size_t dim) {
  double s = 0.0;
  for (std::size_t t = 0; t < dim; ++t) {
    const double diff = x[t] - y[t];
    s += diff * diff;
  }
  return s;
}

inline double l1dist(const double* x, const double* y, std::size_t dim) {
  double s = 0.0;
  for (std::size_t t = 0; t < dim; ++t) s += std::abs(x[t] - y[t]);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// serial reference

namespace serial {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
            std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
  }
}

void matmul_at_b(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                 std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[p * m + i] * b[p * n + j];
      c[i * n + j] = s;
    }
  }
}

void matmul_a_bt(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                 std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
      c[i * n + j] = s;
    }
  }
}

double pair_sqdist_sum(std::span<const double> e, std::size_t rows, std::size_t dim) {
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = i + 1; j < rows; ++j) total += sqdist(&e[i * dim], &e[j * dim], dim);
  return total;
}

double cross_l1_sum(std::span<const double> a, std::size_t rows_a, std::span<const double> b, std::size_t rows_b,
                    std::size_t dim) {
  double total = 0.0;
  for (std::size_t i = 0; i < rows_a; ++i)
    for (std::size_t j = 0; j < rows_b; ++j) total += l1dist(&a[i * dim], &b[j * dim], dim);
  return total;
}

void cross_l1_grad(std::span<const double> a, std::size_t rows_a, std::span<const double> b, std::size_t rows_b,
                   std::size_t dim, double scale, std::span<double> grad_a, std::span<double> grad_b) {
  for (std::size_t i = 0; i < rows_a; ++i) {
    for (std::size_t j = 0; j < rows_b; ++j) {
      for (std::size_t t = 0; t < dim; ++t) {
        const double s = scale * sign(a[i * dim + t] - b[j * dim + t]);
        grad_a[i * dim + t] += s;
        grad_b[j * dim + t] -= s;
      }
    }
  }
}

double rbf_sum(std::span<const double> a, std::size_t rows_a, std::span<const double> b, std::size_t rows_b,
               std::size_t dim, double bandwidth, bool skip_diagonal) {
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  double total = 0.0;
  for (std::size_t i = 0; i < rows_a; ++i) {
    for (std::size_t j = 0; j < rows_b; ++j) {
      if (skip_diagonal && i == j) continue;
      total += std::exp(-sqdist(&a[i * dim], &b[j * dim], dim) * inv);
    }
  }
  return total;
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP

namespace parallel {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
            std::size_t k, std::size_t n) {
  const double* A = a.data();
  const double* B = b.data();
  double* C = c.data();
#pragma omp parallel for schedule(static) if (m * k * n > kParallelWork)
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = C + i * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      const double* bp = B + p * n;
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void matmul_at_b(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                 std::size_t k, std::size_t n) {
  const double* A = a.data();
  const double* B = b.data();
  double* C = c.data();
#pragma omp parallel for schedule(static) if (m * k * n > kParallelWork)
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = C + i * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double api = A[p * m + i];
      if (api == 0.0) continue;
      const double* bp = B + p * n;
#pragma omp simd
      for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
}

void matmul_a_bt(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                 std::size_t k, std::size_t n) {
  const double* A = a.data();
  const double* B = b.data();
  double* C = c.data();
#pragma omp parallel for schedule(static) if (m * k * n > kParallelWork)
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = A + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = B + j * k;
      double s = 0.0;
#pragma omp simd reduction(+ : s)
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      C[i * n + j] = s;
    }
  }
}

double pair_sqdist_sum(std::span<const double> e, std::size_t rows, std::size_t dim) {
  std::vector<double> partial(rows, 0.0);
  const double* E = e.data();
#pragma omp parallel for schedule(dynamic, 8) if (rows * rows * dim > kParallelWork)
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = i + 1; j < rows; ++j) s += sqdist(E + i * dim, E + j * dim, dim);
    partial[i] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double cross_l1_sum(std::span<const double> a, std::size_t rows_a, std::span<const double> b, std::size_t rows_b,
                    std::size_t dim) {
  std::vector<double> partial(rows_a, 0.0);
  const double* A = a.data();
  const double* B = b.data();
#pragma omp parallel for schedule(static) if (rows_a * rows_b * dim > kParallelWork)
  for (std::size_t i = 0; i < rows_a; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < rows_b; ++j) s += l1dist(A + i * dim, B + j * dim, dim);
    partial[i] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

void cross_l1_grad(std::span<const double> a, std::size_t rows_a, std::span<const double> b, std::size_t rows_b,
                   std::size_t dim, double scale, std::span<double> grad_a, std::span<double> grad_b) {
  const double* A = a.data();
  const double* B = b.data();
  const bool par = rows_a * rows_b * dim > kParallelWork;
  // Two passes so each thread writes only its own output rows.
#pragma omp parallel for schedule(static) if (par)
  for (std::size_t i = 0; i < rows_a; ++i) {
    for (std::size_t j = 0; j < rows_b; ++j)
      for (std::size_t t = 0; t < dim; ++t) grad_a[i * dim + t] += scale * sign(A[i * dim + t] - B[j * dim + t]);
  }
#pragma omp parallel for schedule(static) if (par)
  for (std::size_t j = 0; j < rows_b; ++j) {
    for (std::size_t i = 0; i < rows_a; ++i)
      for (std::size_t t = 0; t < dim; ++t) grad_b[j * dim + t] -= scale * sign(A[i * dim + t] - B[j * dim + t]);
  }
}

double rbf_sum(std::span<const double> a, std::size_t rows_a, std::span<const double> b, std::size_t rows_b,
               std::size_t dim, double bandwidth, bool skip_diagonal) {
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  std::vector<double> partial(rows_a, 0.0);
  const double* A = a.data();
  const double* B = b.data();
#pragma omp parallel for schedule(static) if (rows_a * rows_b * dim > kParallelWork)
  for (std::size_t i = 0; i < rows_a; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < rows_b; ++j) {
      if (skip_diagonal && i == j) continue;
      s += std::exp(-sqdist(A + i * dim, B + j * dim, dim) * inv);
    }
    partial[i] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_max_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n < 1 ? 1 : n);
#else
  (void)n;
#endif
}

}  // namespace mlgan::kernels
