#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "rotascore/matrix.hpp"
#include "rotascore/rng.hpp"

using namespace rotascore;

namespace {

Matrix random_matrix(int r, int c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (auto& x : m.data()) x = lo + (hi - lo) * rng.uniform();
  return m;
}

}  // namespace

TEST_CASE("matrix construction and access") {
  Matrix m{{1.0, 2.0}, {3.0, 4.0}};
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 2);
  CHECK(m(0, 1) == 2.0);
  CHECK(m.row(1)[0] == 3.0);

  CHECK(Matrix::zeros(2, 3).size() == 6);
  CHECK(Matrix::full(2, 2, 7.0)(1, 1) == 7.0);
  CHECK(Matrix::identity(3)(1, 1) == 1.0);
  CHECK(Matrix::identity(3)(0, 1) == 0.0);
  CHECK_THROWS_AS(Matrix(0, 3), std::invalid_argument);
}

TEST_CASE("matmul identity, zero and hand-checked product") {
  Rng rng(11);
  const Matrix a = random_matrix(3, 3, rng);
  CHECK(max_abs_diff(matmul(Matrix::identity(3), a), a) == 0.0);

  const Matrix b{{1.0, 2.0}, {3.0, 4.0}};
  const Matrix col{{0.0}, {1.0}};
  const Matrix prod = matmul(b, col);
  CHECK(prod.rows() == 2);
  CHECK(prod.cols() == 1);
  CHECK(prod(0, 0) == 2.0);
  CHECK(prod(1, 0) == 4.0);

  CHECK(frobenius_norm(matmul(a, Matrix::zeros(3, 2))) == 0.0);
}

TEST_CASE("matmul agrees with naive triple loop") {
  Rng rng(12);
  const Matrix a = random_matrix(4, 6, rng);
  const Matrix b = random_matrix(6, 3, rng);
  const Matrix fast = matmul(a, b);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 6; ++k) acc += a(i, k) * b(k, j);
      CHECK(fast(i, j) == doctest::Approx(acc).epsilon(1e-14));
    }
  }
}

TEST_CASE("matmul rejects mismatched shapes and reports both") {
  const Matrix a(2, 3);
  const Matrix b(4, 2);
  try {
    matmul(a, b);
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
    CHECK(msg.find("4x2") != std::string::npos);
  }
}

TEST_CASE("matmul associativity on random 3-chains") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = random_matrix(3, 5, rng);
    const Matrix b = random_matrix(5, 4, rng);
    const Matrix c = random_matrix(4, 2, rng);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    const double scale = std::max(frobenius_norm(left), 1e-12);
    CHECK(frobenius_norm(add(left, ::rotascore::scale(right, -1.0))) / scale < 1e-9);
  }
}

TEST_CASE("transpose, add, scale basics") {
  const Matrix a{{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}};
  const Matrix at = transpose(a);
  CHECK(at.rows() == 3);
  CHECK(at(2, 1) == 6.0);
  CHECK(max_abs_diff(transpose(at), a) == 0.0);

  CHECK(add(a, scale(a, -1.0)).all_finite());
  CHECK(frobenius_norm(add(a, scale(a, -1.0))) == 0.0);
  CHECK_THROWS_AS(add(a, at), std::invalid_argument);
}

TEST_CASE("softmax rows sum to 1 for wide-range inputs") {
  Rng rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix m = random_matrix(3, 7, rng, -50.0, 50.0);
    const Matrix s = softmax_rows(m);
    for (int i = 0; i < s.rows(); ++i) {
      double sum = 0.0;
      for (int j = 0; j < s.cols(); ++j) {
        CHECK(s(i, j) >= 0.0);
        sum += s(i, j);
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("softmax of equal entries is uniform") {
  const Matrix s = softmax_rows(Matrix::full(1, 3, 4.2));
  for (int j = 0; j < 3; ++j) CHECK(s(0, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("softmax shift invariance") {
  Rng rng(15);
  const Matrix m = random_matrix(2, 5, rng, -3.0, 3.0);
  Matrix shifted = m;
  for (auto& x : shifted.data()) x += 17.25;
  CHECK(max_abs_diff(softmax_rows(m), softmax_rows(shifted)) < 1e-12);
}

TEST_CASE("softmax worked example [0, ln 3]") {
  const Matrix s = softmax_rows(Matrix{{0.0, std::log(3.0)}});
  CHECK(s(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(s(0, 1) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("all_finite flags NaN and Inf") {
  Matrix m(2, 2);
  CHECK(m.all_finite());
  m(1, 1) = std::nan("");
  CHECK_FALSE(m.all_finite());
  m(1, 1) = 1e308 * 10.0;
  CHECK_FALSE(m.all_finite());
}
