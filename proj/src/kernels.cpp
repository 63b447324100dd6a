#include "hgane/kernels.hpp"

#include <algorithm>
#include <cstddef>
#include <string>

#include "hgane/common.hpp"

namespace hgane {
namespace {

constexpr std::ptrdiff_t kColumnBlock = 64;

void require(bool ok, const char* what) {
  if (!ok) throw ShapeError(std::string("shape mismatch in ") + what);
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

void project(const Matrix& x, const Matrix& w, Matrix& out) {
  require(x.cols() == w.rows(), "project");
  if (!(out.rows() == x.rows() && out.cols() == w.cols())) out = Matrix(x.rows(), w.cols());
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
  const std::size_t d_in = x.cols();
  const std::size_t d_out = w.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double* dst = out.data() + i * d_out;
    std::fill(dst, dst + d_out, 0.0);
    const double* src = x.data() + i * d_in;
    for (std::size_t k = 0; k < d_in; ++k) {
      const double v = src[k];
      if (v == 0.0) continue;
      const double* wr = w.data() + k * d_out;
      for (std::size_t o = 0; o < d_out; ++o) dst[o] += v * wr[o];
    }
  }
}

void accumulate_weight_grad(const Matrix& xt, const Matrix& d_out, Matrix& d_w) {
  require(xt.cols() == d_out.rows(), "accumulate_weight_grad");
  require(d_w.rows() == xt.rows() && d_w.cols() == d_out.cols(), "accumulate_weight_grad");
  const auto d_in = static_cast<std::ptrdiff_t>(xt.rows());
  const std::size_t n = xt.cols();
  const std::size_t width = d_out.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < d_in; ++k) {
    double* dst = d_w.data() + k * width;
    const double* xr = xt.data() + k * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = xr[i];
      if (v == 0.0) continue;
      const double* g = d_out.data() + i * width;
      for (std::size_t o = 0; o < width; ++o) dst[o] += v * g[o];
    }
  }
}

void accumulate_input_grad(const Matrix& d_out, const Matrix& w, Matrix& d_x) {
  require(d_out.cols() == w.cols(), "accumulate_input_grad");
  require(d_x.rows() == d_out.rows() && d_x.cols() == w.rows(), "accumulate_input_grad");
  const auto n = static_cast<std::ptrdiff_t>(d_out.rows());
  const std::size_t d_in = w.rows();
  const std::size_t width = w.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* g = d_out.data() + i * width;
    double* dst = d_x.data() + i * d_in;
    for (std::size_t k = 0; k < d_in; ++k) {
      const double* wr = w.data() + k * width;
      double sum = 0.0;
      for (std::size_t o = 0; o < width; ++o) sum += g[o] * wr[o];
      dst[k] += sum;
    }
  }
}

void row_dots(const Matrix& m, std::span<const double> v, std::span<double> out) {
  require(m.cols() == v.size() && out.size() == m.rows(), "row_dots");
  const auto n = static_cast<std::ptrdiff_t>(m.rows());
  const std::size_t width = m.cols();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* r = m.data() + i * width;
    double sum = 0.0;
    for (std::size_t o = 0; o < width; ++o) sum += r[o] * v[o];
    out[i] = sum;
  }
}

void accumulate_weighted_rows(const Matrix& m, std::span<const double> weights,
                              std::span<double> out) {
  require(weights.size() == m.rows() && out.size() == m.cols(), "accumulate_weighted_rows");
  const auto width = static_cast<std::ptrdiff_t>(m.cols());
  const std::size_t n = m.rows();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t begin = 0; begin < width; begin += kColumnBlock) {
    const std::ptrdiff_t end = std::min(begin + kColumnBlock, width);
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = weights[i];
      if (wi == 0.0) continue;
      const double* r = m.data() + i * m.cols();
      for (std::ptrdiff_t o = begin; o < end; ++o) out[o] += wi * r[o];
    }
  }
}

namespace serial {

void project(const Matrix& x, const Matrix& w, Matrix& out) {
  require(x.cols() == w.rows(), "serial::project");
  out = Matrix(x.rows(), w.cols());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t o = 0; o < w.cols(); ++o) {
      double sum = 0.0;
      for (std::size_t k = 0; k < x.cols(); ++k) sum += x(i, k) * w(k, o);
      out(i, o) = sum;
    }
}

void accumulate_weight_grad(const Matrix& xt, const Matrix& d_out, Matrix& d_w) {
  require(xt.cols() == d_out.rows(), "serial::accumulate_weight_grad");
  require(d_w.rows() == xt.rows() && d_w.cols() == d_out.cols(),
          "serial::accumulate_weight_grad");
  for (std::size_t k = 0; k < xt.rows(); ++k)
    for (std::size_t o = 0; o < d_out.cols(); ++o) {
      double sum = 0.0;
      for (std::size_t i = 0; i < xt.cols(); ++i) sum += xt(k, i) * d_out(i, o);
      d_w(k, o) += sum;
    }
}

void accumulate_input_grad(const Matrix& d_out, const Matrix& w, Matrix& d_x) {
  require(d_out.cols() == w.cols(), "serial::accumulate_input_grad");
  require(d_x.rows() == d_out.rows() && d_x.cols() == w.rows(),
          "serial::accumulate_input_grad");
  for (std::size_t i = 0; i < d_out.rows(); ++i)
    for (std::size_t k = 0; k < w.rows(); ++k) {
      double sum = 0.0;
      for (std::size_t o = 0; o < w.cols(); ++o) sum += d_out(i, o) * w(k, o);
      d_x(i, k) += sum;
    }
}

void row_dots(const Matrix& m, std::span<const double> v, std::span<double> out) {
  require(m.cols() == v.size() && out.size() == m.rows(), "serial::row_dots");
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = hgane::dot(m.row(i), v);
}

void accumulate_weighted_rows(const Matrix& m, std::span<const double> weights,
                              std::span<double> out) {
  require(weights.size() == m.rows() && out.size() == m.cols(),
          "serial::accumulate_weighted_rows");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t o = 0; o < m.cols(); ++o) out[o] += weights[i] * m(i, o);
}

}  // namespace serial
}  // namespace hgane
