#pragma once

// Dense numeric kernels behind the tape ops and the evaluation metrics.
//
// Every kernel exists twice: `serial` is the straightforward reference used by
// the tests, `parallel` is the OpenMP version used at runtime. Parallel kernels
// split work by output row and reduce per-row partials in index order, so their
// results do not depend on the thread count.
//
// Layouts are row-major. Dimension names follow the call: `a` is rows_a x cols_a.

#include <cstddef>
#include <span>

namespace mlgan::kernels {

namespace serial {

/// c (m x n) = a (m x k) * b (k x n)
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
            std::size_t k, std::size_t n);
/// c (m x n) = a^T * b, with a stored k x m and b stored k x n
void matmul_at_b(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                 std::size_t k, std::size_t n);
/// c (m x n) = a * b^T, with a stored m x k and b stored n x k
void matmul_a_bt(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                 std::size_t k, std::size_t n);

/// Sum over unordered row pairs i < j of squared Euclidean distance.
double pair_sqdist_sum(std::span<const double> e, std::size_t rows, std::size_t dim);

/// Sum over all (i, j) of ||a_i - b_j||_1.
double cross_l1_sum(std::span<const double> a, std::size_t rows_a, std::span<const double> b, std::size_t rows_b,
                    std::size_t dim);
/// Accumulates scale * d(cross_l1_sum)/da into grad_a and the same for b. sign(0) = 0.
void cross_l1_grad(std::span<const double> a, std::size_t rows_a, std::span<const double> b, std::size_t rows_b,
                   std::size_t dim, double scale, std::span<double> grad_a, std::span<double> grad_b);

/// Sum of exp(-||a_i - b_j||^2 / (2 h^2)) over all (i, j), or over i != j when skip_diagonal.
double rbf_sum(std::span<const double> a, std::size_t rows_a, std::span<const double> b, std::size_t rows_b,
               std::size_t dim, double bandwidth, bool skip_diagonal);

}  // namespace serial

namespace parallel {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
            std::size_t k, std::size_t n);
void matmul_at_b(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                 std::size_t k, std::size_t n);
void matmul_a_bt(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                 std::size_t k, std::size_t n);
double pair_sqdist_sum(std::span<const double> e, std::size_t rows, std::size_t dim);
double cross_l1_sum(std::span<const double> a, std::size_t rows_a, std::span<const double> b, std::size_t rows_b,
                    std::size_t dim);
void cross_l1_grad(std::span<const double> a, std::size_t rows_a, std::span<const double> b, std::size_t rows_b,
                   std::size_t dim, double scale, std::span<double> grad_a, std::span<double> grad_b);
double rbf_sum(std::span<const double> a, std::size_t rows_a, std::span<const double> b, std::size_t rows_b,
               std::size_t dim, double bandwidth, bool skip_diagonal);

}  // namespace parallel

/// Threads available to parallel kernels (1 when built without OpenMP).
int max_threads();
void set_max_threads(int n);

}  // namespace mlgan::kernels
