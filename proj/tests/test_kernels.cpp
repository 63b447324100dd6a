#include <doctest.h>

#include <omp.h>

#include <cmath>

#include "hgane/common.hpp"
#include "hgane/kernels.hpp"
#include "support.hpp"

using namespace hgane;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double zero_frac = 0.0) {
  Matrix m(r, c);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution zero(zero_frac);
  for (double& v : m.flat()) v = zero(rng) ? 0.0 : u(rng);
  return m;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// Naive triple loop, independent of both implementations.
Matrix naive_product(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

}  // namespace

TEST_CASE("dot and transpose on small values") {
  const std::vector<double> a{1, 2, 3}, b{4, -5, 6};
  CHECK(dot(a, b) == 12.0);
  Matrix m(2, 3);
  for (std::size_t i = 0; i < 6; ++i) m.flat()[i] = static_cast<double>(i);
  const Matrix t = transpose(m);
  CHECK(t.rows() == 3);
  CHECK(t(2, 1) == 5.0);
  CHECK(transpose(t) == m);
}

TEST_CASE("project matches the naive product, with and without sparse input") {
  Rng rng(1);
  for (double zeros : {0.0, 0.9}) {
    const Matrix x = random_matrix(37, 70, rng, zeros), w = random_matrix(70, 130, rng);
    Matrix par, ser;
    project(x, w, par);
    serial::project(x, w, ser);
    const Matrix ref = naive_product(x, w);
    CHECK(max_diff(par.flat(), ref.flat()) < 1e-12);
    CHECK(max_diff(ser.flat(), ref.flat()) < 1e-12);
  }
}

TEST_CASE("gradient accumulators add to existing contents") {
  Rng rng(2);
  const Matrix x = random_matrix(23, 9, rng), d_out = random_matrix(23, 140, rng);
  const Matrix w = random_matrix(9, 140, rng);
  const Matrix start_w = random_matrix(9, 140, rng), start_x = random_matrix(23, 9, rng);

  Matrix dw_par = start_w, dw_ser = start_w;
  accumulate_weight_grad(transpose(x), d_out, dw_par);
  serial::accumulate_weight_grad(transpose(x), d_out, dw_ser);
  Matrix expect_w = naive_product(transpose(x), d_out);
  for (std::size_t i = 0; i < expect_w.size(); ++i) expect_w.flat()[i] += start_w.flat()[i];
  CHECK(max_diff(dw_par.flat(), expect_w.flat()) < 1e-12);
  CHECK(max_diff(dw_ser.flat(), expect_w.flat()) < 1e-12);

  Matrix dx_par = start_x, dx_ser = start_x;
  accumulate_input_grad(d_out, w, dx_par);
  serial::accumulate_input_grad(d_out, w, dx_ser);
  Matrix expect_x = naive_product(d_out, transpose(w));
  for (std::size_t i = 0; i < expect_x.size(); ++i) expect_x.flat()[i] += start_x.flat()[i];
  CHECK(max_diff(dx_par.flat(), expect_x.flat()) < 1e-12);
  CHECK(max_diff(dx_ser.flat(), expect_x.flat()) < 1e-12);
}

TEST_CASE("row_dots and accumulate_weighted_rows") {
  Rng rng(3);
  const Matrix m = random_matrix(50, 200, rng);
  std::vector<double> v(200), weights(50);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& x : v) x = u(rng);
  for (double& x : weights) x = u(rng);

  std::vector<double> par(50), ser(50);
  row_dots(m, v, par);
  serial::row_dots(m, v, ser);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(std::abs(par[i] - dot(m.row(i), v)) < 1e-12);
    CHECK(std::abs(ser[i] - dot(m.row(i), v)) < 1e-12);
  }

  std::vector<double> acc_par(200, 1.0), acc_ser(200, 1.0), expect(200, 1.0);
  accumulate_weighted_rows(m, weights, acc_par);
  serial::accumulate_weighted_rows(m, weights, acc_ser);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t c = 0; c < 200; ++c) expect[c] += weights[i] * m(i, c);
  CHECK(max_diff(acc_par, expect) < 1e-12);
  CHECK(max_diff(acc_ser, expect) < 1e-12);
}

TEST_CASE("parallel kernels are bit-identical across thread counts") {
  Rng rng(4);
  const Matrix x = random_matrix(64, 100, rng, 0.5), w = random_matrix(100, 150, rng);
  const Matrix d_out = random_matrix(64, 150, rng);
  const Matrix xt = transpose(x);
  std::vector<double> weights(64, 0.25);

  auto run = [&](int threads) {
    omp_set_num_threads(threads);
    Matrix out, dw(100, 150), dx(64, 100);
    project(x, w, out);
    accumulate_weight_grad(xt, d_out, dw);
    accumulate_input_grad(d_out, w, dx);
    std::vector<double> acc(150);
    accumulate_weighted_rows(d_out, weights, acc);
    return std::make_tuple(out, dw, dx, acc);
  };
  const int saved = omp_get_max_threads();
  const auto one = run(1);
  const auto four = run(4);
  omp_set_num_threads(saved);
  CHECK(std::get<0>(one) == std::get<0>(four));
  CHECK(std::get<1>(one) == std::get<1>(four));
  CHECK(std::get<2>(one) == std::get<2>(four));
  CHECK(std::get<3>(one) == std::get<3>(four));
}

TEST_CASE("shape mismatches throw ShapeError") {
  const Matrix a(3, 4), b(5, 2), c(3, 2);
  Matrix out;
  CHECK_THROWS_AS(project(a, b, out), ShapeError);
  CHECK_THROWS_AS(serial::project(a, b, out), ShapeError);
  Matrix dw(4, 3);
  CHECK_THROWS_AS(accumulate_weight_grad(transpose(a), c, dw), ShapeError);
  CHECK_THROWS_AS(serial::accumulate_weight_grad(transpose(a), c, dw), ShapeError);
  Matrix dx(3, 5);
  CHECK_THROWS_AS(accumulate_input_grad(c, Matrix(4, 2), dx), ShapeError);
  std::vector<double> v(3), o(3);
  CHECK_THROWS_AS(row_dots(a, v, o), ShapeError);
  CHECK_THROWS_AS(serial::row_dots(a, v, o), ShapeError);
  std::vector<double> wts(2), acc(4);
  CHECK_THROWS_AS(accumulate_weighted_rows(a, wts, acc), ShapeError);
  CHECK_THROWS_AS(dot(v, std::vector<double>(2)), ShapeError);
}
