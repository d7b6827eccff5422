#include "lucp/cp.hpp"

#include <random>

#include <catch2/catch_amalgamated.hpp>

using namespace lucp;

namespace {

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = dist(rng);
  return m;
}

// Random CP model whose factor columns are orthonormalized, so the Kruskal
// bound holds and the decomposition is essentially unique.
CPDecomposition unique_rank3_model(const std::vector<int>& shape, std::mt19937_64& rng) {
  CPDecomposition cp;
  cp.shape = shape;
  cp.weights = Vector(3);
  cp.weights << 3.0, 2.0, 1.0;
  for (int d : shape) {
    Matrix g = random_matrix(d, 3, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(d, 3);
    cp.factors.push_back(q);
  }
  return cp;
}

}  // namespace

TEST_CASE("cp_reconstruct matches direct outer-product sum") {
  std::mt19937_64 rng(11);
  CPDecomposition cp;
  cp.shape = {2, 3, 4};
  cp.weights = Vector(2);
  cp.weights << 1.5, -0.5;
  for (int d : cp.shape) cp.factors.push_back(random_matrix(d, 2, rng));
  DenseTensor direct({2, 3, 4});
  for (int r = 0; r < 2; ++r) {
    DenseTensor term = outer_product(
        {cp.factors[0].col(r), cp.factors[1].col(r), cp.factors[2].col(r)});
    direct.data() += cp.weights[r] * term.data();
  }
  DenseTensor rec = cp_reconstruct(cp);
  REQUIRE((rec.data() - direct.data()).cwiseAbs().maxCoeff() < 1e-13);
  REQUIRE_THAT(cp_loss(cp, direct), Catch::Matchers::WithinAbs(0.0, 1e-24));
}

TEST_CASE("cp_canonicalize normalizes, sorts, and preserves the tensor") {
  std::mt19937_64 rng(12);
  CPDecomposition cp;
  cp.shape = {3, 3, 3};
  cp.weights = Vector(3);
  cp.weights << -1.0, 4.0, 2.0;
  for (int d : cp.shape) cp.factors.push_back(random_matrix(d, 3, rng));
  DenseTensor before = cp_reconstruct(cp);
  CPDecomposition can = cp_canonicalize(cp);
  for (int r = 0; r < 3; ++r) {
    REQUIRE(can.weights[r] >= 0.0);
    if (r > 0) REQUIRE(can.weights[r - 1] >= can.weights[r]);
    for (const auto& f : can.factors)
      REQUIRE_THAT(f.col(r).norm(), Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
  DenseTensor after = cp_reconstruct(can);
  REQUIRE((before.data() - after.data()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("canonical form is invariant under column permutation and sign flips") {
  std::mt19937_64 rng(13);
  CPDecomposition cp;
  cp.shape = {4, 3};
  cp.weights = Vector(3);
  cp.weights << 3.0, 2.0, 1.0;
  for (int d : cp.shape) cp.factors.push_back(random_matrix(d, 3, rng));
  CPDecomposition scrambled = cp;
  // permute components (0 1 2) -> (2 0 1) and flip paired signs on component 0
  for (auto* f : {&scrambled.factors[0], &scrambled.factors[1]}) {
    Matrix m = *f;
    f->col(0) = m.col(2);
    f->col(1) = m.col(0);
    f->col(2) = m.col(1);
  }
  scrambled.weights << 1.0, 3.0, 2.0;
  scrambled.factors[0].col(1) *= -1.0;
  scrambled.factors[1].col(1) *= -1.0;
  CPDecomposition a = cp_canonicalize(cp);
  CPDecomposition b = cp_canonicalize(scrambled);
  REQUIRE((a.weights - b.weights).cwiseAbs().maxCoeff() < 1e-12);
  for (int k = 0; k < 2; ++k)
    REQUIRE((a.factors[k] - b.factors[k]).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kruskal bound accepts orthonormal factors and rejects collinear ones") {
  std::mt19937_64 rng(14);
  CPDecomposition good = unique_rank3_model({4, 4, 4}, rng);
  REQUIRE(kruskal_check(good));  // k-ranks 3+3+3 >= 2*3 + 2

  CPDecomposition bad = good;
  bad.factors[0].col(1) = bad.factors[0].col(0);
  bad.factors[1].col(1) = bad.factors[1].col(0);
  REQUIRE_FALSE(kruskal_check(bad));
}

TEST_CASE("ALS recovers a Kruskal-unique rank-3 tensor") {
  std::mt19937_64 rng(15);
  AlsConfig cfg;
  for (int trial = 0; trial < 3; ++trial) {
    CPDecomposition model = unique_rank3_model({4, 5, 3}, rng);
    DenseTensor t = cp_reconstruct(model);
    cfg.seed = 100 + trial;
    FitResult fit = cp_als(t, 3, cfg);
    REQUIRE(std::sqrt(fit.loss) / t.frobenius_norm() < 1e-6);
    // essential uniqueness: canonical weights match the model's
    CPDecomposition can = cp_canonicalize(model);
    REQUIRE((fit.cp.weights - can.weights).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("ALS per-sweep loss is monotone non-increasing") {
  std::mt19937_64 rng(16);
  AlsConfig cfg;
  cfg.restarts = 2;
  cfg.max_iters = 60;
  for (int trial = 0; trial < 5; ++trial) {
    DenseTensor t({4, 4, 4});
    std::normal_distribution<double> dist;
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
    for (int rank = 1; rank <= 3; ++rank) {
      cfg.seed = 7 * trial + rank;
      FitResult fit = cp_als(t, rank, cfg);
      for (size_t s = 1; s < fit.loss_history.size(); ++s)
        REQUIRE(fit.loss_history[s] <= fit.loss_history[s - 1] + 1e-12);
    }
  }
}

TEST_CASE("order-2 ALS reproduces the SVD fit exactly") {
  std::mt19937_64 rng(17);
  Matrix m = random_matrix(5, 4, rng);
  DenseTensor t = fold(m, 0, {5, 4});
  AlsConfig cfg;
  FitResult fit = cp_als(t, 4, cfg);
  REQUIRE(std::sqrt(fit.loss) / t.frobenius_norm() < 1e-10);
  Vector sv = singular_values(m);
  REQUIRE((fit.cp.weights - sv.head(4)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("orthogonal ALS yields orthonormal factor columns") {
  std::mt19937_64 rng(18);
  CPDecomposition model = unique_rank3_model({4, 4, 4}, rng);
  DenseTensor t = cp_reconstruct(model);
  AlsConfig cfg;
  FitResult fit = cp_als_orthogonal(t, 3, cfg);
  REQUIRE(std::sqrt(fit.loss) / t.frobenius_norm() < 1e-8);
  for (const auto& f : fit.cp.factors) {
    Matrix gram = f.transpose() * f;
    REQUIRE((gram - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  }
  // summand orthogonality: <term_r, term_s> = w_r w_s prod_k <a_r, a_s> = 0
  for (int r = 0; r < 3; ++r)
    for (int s = r + 1; s < 3; ++s) {
      double ip = fit.cp.weights[r] * fit.cp.weights[s];
      for (const auto& f : fit.cp.factors) ip *= f.col(r).dot(f.col(s));
      REQUIRE(std::abs(ip) < 1e-8);
    }
}

TEST_CASE("orthogonal ALS rejects rank above a mode size") {
  DenseTensor t({2, 2, 2});
  AlsConfig cfg;
  REQUIRE_THROWS_AS(cp_als_orthogonal(t, 3, cfg), invalid_input);
}

TEST_CASE("estimate_rank on structured tensors") {
  std::mt19937_64 rng(19);
  AlsConfig cfg;

  DenseTensor zero({3, 3, 3});
  auto [r0, fit0] = estimate_rank(zero, cfg, 1e-8);
  REQUIRE(r0 == 0);
  REQUIRE(fit0.cp.rank() == 0);

  Vector a(3), b(4), c(2);
  a << 1, 2, 3;
  b << -1, 0, 2, 1;
  c << 0.5, 1;
  DenseTensor rank1 = outer_product({a, b, c});
  auto [r1, fit1] = estimate_rank(rank1, cfg, 1e-8);
  REQUIRE(r1 == 1);
  REQUIRE(std::sqrt(fit1.loss) / rank1.frobenius_norm() < 1e-8);

  Matrix m = random_matrix(5, 2, rng) * random_matrix(2, 6, rng);
  DenseTensor t2 = fold(m, 0, {5, 6});
  auto [r2, fit2] = estimate_rank(t2, cfg, 1e-8);
  REQUIRE(r2 == 2);

  CPDecomposition model = unique_rank3_model({4, 4, 4}, rng);
  DenseTensor t3 = cp_reconstruct(model);
  auto [r3, fit3] = estimate_rank(t3, cfg, 1e-8);
  REQUIRE(r3 == 3);
  REQUIRE(fit3.converged);
}

TEST_CASE("ALS is deterministic in the seed") {
  std::mt19937_64 rng(20);
  DenseTensor t({3, 3, 3});
  std::normal_distribution<double> dist;
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  AlsConfig cfg;
  cfg.seed = 42;
  cfg.restarts = 3;
  FitResult a = cp_als(t, 2, cfg);
  FitResult b = cp_als(t, 2, cfg);
  REQUIRE(a.loss == b.loss);
  for (int k = 0; k < 3; ++k)
    REQUIRE((a.cp.factors[k] - b.cp.factors[k]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("invalid configurations are rejected") {
  AlsConfig bad;
  bad.max_iters = 0;
  REQUIRE_THROWS_AS(bad.validate(), invalid_input);
  DenseTensor t({2, 2});
  AlsConfig cfg;
  REQUIRE_THROWS_AS(cp_als(t, 0, cfg), invalid_input);
}