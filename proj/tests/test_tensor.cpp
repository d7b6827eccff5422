#include "lucp/tensor.hpp"

#include <random>

#include <catch2/catch_amalgamated.hpp>

using namespace lucp;

namespace {

DenseTensor random_tensor(const std::vector<int>& shape, std::mt19937_64& rng) {
  DenseTensor t(shape);
  std::normal_distribution<double> dist;
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  return t;
}

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = dist(rng);
  return m;
}

}  // namespace

TEST_CASE("dense tensor indexing is row-major with mode 0 slowest") {
  DenseTensor t({2, 3, 4});
  REQUIRE(t.size() == 24);
  t({1, 2, 3}) = 5.0;
  REQUIRE(t.data()[1 * 12 + 2 * 4 + 3] == 5.0);
  REQUIRE(t({1, 2, 3}) == 5.0);
  REQUIRE(t({0, 0, 0}) == 0.0);
}

TEST_CASE("shape/data length mismatch is rejected") {
  Vector v = Vector::Zero(5);
  REQUIRE_THROWS_AS(DenseTensor({2, 3}, v), invalid_input);
  REQUIRE_THROWS_AS(DenseTensor({0, 3}), invalid_input);
}

TEST_CASE("outer product of vectors") {
  Vector a(2), b(3);
  a << 1, 2;
  b << 4, 5, 6;
  DenseTensor t = outer_product({a, b});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) REQUIRE(t({i, j}) == a[i] * b[j]);
}

TEST_CASE("matricization column order puts earlier modes fastest") {
  // [DERIVED] column index of (i,j,k) in mode-1 unfolding of a 2x3x4 tensor
  // is i + 2*k: remaining modes (0, 2) with mode 0 varying fastest.
  std::mt19937_64 rng(1);
  DenseTensor t = random_tensor({2, 3, 4}, rng);
  Matrix m1 = matricize(t, 1);
  REQUIRE(m1.rows() == 3);
  REQUIRE(m1.cols() == 8);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 4; ++k) REQUIRE(m1(j, i + 2 * k) == t({i, j, k}));
}

TEST_CASE("fold inverts matricize on every mode") {
  std::mt19937_64 rng(2);
  DenseTensor t = random_tensor({3, 2, 4, 2}, rng);
  for (int mode = 0; mode < 4; ++mode) {
    DenseTensor back = fold(matricize(t, mode), mode, t.shape());
    REQUIRE((back.data() - t.data()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("frobenius norm equals every unfolding norm") {
  std::mt19937_64 rng(3);
  DenseTensor t = random_tensor({3, 4, 2}, rng);
  for (int mode = 0; mode < 3; ++mode)
    REQUIRE_THAT(matricize(t, mode).norm(),
                 Catch::Matchers::WithinAbs(t.frobenius_norm(), 1e-12));
}

TEST_CASE("kronecker and khatri-rao mixed-product identities") {
  // [DERIVED] (S kron N)(P kr Q) = (S P) kr (N Q) and
  // (A kr B)^t (A kr B) = A^t A hadamard B^t B, 100 random instances.
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix s = random_matrix(3, 4, rng), n = random_matrix(2, 5, rng);
    Matrix p = random_matrix(4, 3, rng), q = random_matrix(5, 3, rng);
    Matrix lhs = kronecker(s, n) * khatri_rao(p, q);
    Matrix rhs = khatri_rao(s * p, n * q);
    REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);

    Matrix a = random_matrix(4, 3, rng), b = random_matrix(6, 3, rng);
    Matrix kr = khatri_rao(a, b);
    Matrix gram = kr.transpose() * kr;
    Matrix had = hadamard(a.transpose() * a, b.transpose() * b);
    REQUIRE((gram - had).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("khatri-rao requires equal column counts") {
  REQUIRE_THROWS_AS(khatri_rao(Matrix::Zero(2, 3), Matrix::Zero(2, 4)), invalid_input);
  REQUIRE_THROWS_AS(hadamard(Matrix::Zero(2, 3), Matrix::Zero(3, 3)), invalid_input);
}

TEST_CASE("mode product matches matricized multiplication") {
  std::mt19937_64 rng(5);
  DenseTensor t = random_tensor({3, 4, 2}, rng);
  Matrix a = random_matrix(5, 4, rng);
  DenseTensor p = mode_product(a, t, 1);
  REQUIRE(p.shape() == std::vector<int>{3, 5, 2});
  Matrix expected = a * matricize(t, 1);
  REQUIRE((matricize(p, 1) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("multilinear apply equals chained mode products") {
  std::mt19937_64 rng(6);
  DenseTensor t = random_tensor({2, 3, 4}, rng);
  std::vector<Matrix> mats = {random_matrix(2, 2, rng), random_matrix(5, 3, rng),
                              random_matrix(3, 4, rng)};
  DenseTensor direct = multilinear_apply(mats, t);
  DenseTensor chained = t;
  for (int mode = 0; mode < 3; ++mode) chained = mode_product(mats[mode], chained, mode);
  REQUIRE((direct.data() - chained.data()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("numeric rank detects constructed deficiency") {
  std::mt19937_64 rng(7);
  Matrix a = random_matrix(6, 2, rng);
  Matrix b = random_matrix(2, 5, rng);
  REQUIRE(numeric_rank(a * b) == 2);
  REQUIRE(numeric_rank(Matrix::Zero(4, 4)) == 0);
  REQUIRE(numeric_rank(Matrix::Identity(4, 4)) == 4);
}

TEST_CASE("singular values of a diagonal matrix") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 3.0;
  d(1, 1) = -2.0;
  d(2, 2) = 1.0;
  Vector sv = singular_values(d);
  REQUIRE_THAT(sv[0], Catch::Matchers::WithinAbs(3.0, 1e-14));
  REQUIRE_THAT(sv[1], Catch::Matchers::WithinAbs(2.0, 1e-14));
  REQUIRE_THAT(sv[2], Catch::Matchers::WithinAbs(1.0, 1e-14));
}

TEST_CASE("k-rank of structured matrices") {
  // [DERIVED] identity has full k-rank; a repeated column forces k-rank 1;
  // a zero column forces k-rank 0.
  REQUIRE(k_rank(Matrix::Identity(4, 4)) == 4);

  Matrix rep(3, 3);
  rep << 1, 1, 0, 0, 0, 1, 0, 0, 0;
  REQUIRE(k_rank(rep) == 1);

  Matrix z = Matrix::Identity(3, 3);
  z.col(2).setZero();
  REQUIRE(k_rank(z) == 0);

  // 3 generic columns in R^2: every 2 independent, 3 dependent -> k-rank 2
  Matrix g(2, 3);
  g << 1, 0, 1, 0, 1, 1;
  REQUIRE(k_rank(g) == 2);
}
