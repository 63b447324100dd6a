#pragma once

// Dense kernels shared by the attention layer. The functions in `hgane`
// are OpenMP-parallel over an output index (rows, or column blocks for the
// reductions), so every output element is produced by exactly one thread
// in a fixed summation order: results do not depend on the thread count.
// `hgane::serial` holds straightforward single-threaded versions of the
// same contracts, kept for tests and the benchmark.

#include <span>

#include "hgane/matrix.hpp"

namespace hgane {

double dot(std::span<const double> a, std::span<const double> b);

// out = x * w   (x: n x d_in, w: d_in x d_out). Zero entries of x are skipped,
// which makes adjacency-indicator inputs cost O(nnz * d_out).
void project(const Matrix& x, const Matrix& w, Matrix& out);

// d_w += x^T * d_out, given xt = x^T precomputed.
void accumulate_weight_grad(const Matrix& xt, const Matrix& d_out, Matrix& d_w);

// d_x += d_out * w^T.
void accumulate_input_grad(const Matrix& d_out, const Matrix& w, Matrix& d_x);

// out[i] = m.row(i) . v
void row_dots(const Matrix& m, std::span<const double> v, std::span<double> out);

// out += sum_i weights[i] * m.row(i)
void accumulate_weighted_rows(const Matrix& m, std::span<const double> weights,
                              std::span<double> out);

namespace serial {

void project(const Matrix& x, const Matrix& w, Matrix& out);
void accumulate_weight_grad(const Matrix& xt, const Matrix& d_out, Matrix& d_w);
void accumulate_input_grad(const Matrix& d_out, const Matrix& w, Matrix& d_x);
void row_dots(const Matrix& m, std::span<const double> v, std::span<double> out);
void accumulate_weighted_rows(const Matrix& m, std::span<const double> weights,
                              std::span<double> out);

}  // namespace serial
}  // namespace hgane
