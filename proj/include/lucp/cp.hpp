#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "lucp/tensor.hpp"

namespace lucp {

/// Weighted sum of rank-one terms: weights[r] * outer(factor[0].col(r), ...).
struct CPDecomposition {
  Vector weights;               // length R
  std::vector<Matrix> factors;  // factor k is shape[k] x R
  std::vector<int> shape;

  int rank() const { return static_cast<int>(weights.size()); }
};

struct AlsConfig {
  int max_iters = 500;
  double rel_tol = 1e-10;
  int restarts = 20;
  std::uint64_t seed = 0;
  enum class Init { RandomGaussian, UnfoldingSvd };
  Init init = Init::UnfoldingSvd;

  void validate() const {
    if (max_iters < 1 || restarts < 1 || rel_tol <= 0)
      throw invalid_input("AlsConfig: max_iters >= 1, restarts >= 1, rel_tol > 0 required");
  }
};

struct FitResult {
  CPDecomposition cp;
  double loss = 0.0;  // squared Frobenius distance
  int iterations = 0;
  bool converged = false;
  std::vector<double> loss_history;  // loss after each full sweep
};

inline DenseTensor cp_reconstruct(const CPDecomposition& cp) {
  DenseTensor t(cp.shape);
  if (cp.rank() == 0) return t;
  // X_(0) = A_0 diag(w) (A_{N-1} kr ... kr A_1)^t
  Matrix kr = Matrix::Ones(1, cp.rank());
  for (int k = static_cast<int>(cp.factors.size()) - 1; k >= 1; --k)
    kr = khatri_rao(kr, cp.factors[k]);
  Matrix m = cp.factors[0] * cp.weights.asDiagonal() * kr.transpose();
  return fold(m, 0, cp.shape);
}

inline double cp_loss(const CPDecomposition& cp, const DenseTensor& t) {
  if (cp.shape != t.shape()) throw invalid_input("cp_loss: shape mismatch");
  if (cp.rank() == 0) return t.data().squaredNorm();
  return (cp_reconstruct(cp).data() - t.data()).squaredNorm();
}

/// Resolves the scaling and ordering indeterminacies: unit columns, weights
/// non-negative and sorted non-increasing, column signs paired into the last
/// factor, components tie-broken lexicographically on the first factor.
inline CPDecomposition cp_canonicalize(CPDecomposition cp) {
  const int R = cp.rank();
  const int N = static_cast<int>(cp.factors.size());
  if (R == 0) return cp;
  for (int r = 0; r < R; ++r) {
    for (int k = 0; k < N; ++k) {
      double nrm = cp.factors[k].col(r).norm();
      cp.weights[r] *= nrm;
      if (nrm > 0) {
        cp.factors[k].col(r) /= nrm;
      } else {
        cp.factors[k].col(r).setZero();
        cp.factors[k](0, r) = 1.0;
      }
    }
    if (cp.weights[r] < 0) {
      cp.weights[r] = -cp.weights[r];
      cp.factors[N - 1].col(r) *= -1.0;
    }
    // leading largest-magnitude entry non-negative, compensated in last factor
    for (int k = 0; k + 1 < N; ++k) {
      auto col = cp.factors[k].col(r);
      Eigen::Index lead = 0;
      for (Eigen::Index i = 1; i < col.size(); ++i)
        if (std::abs(col[i]) > std::abs(col[lead])) lead = i;
      if (col[lead] < 0) {
        cp.factors[k].col(r) *= -1.0;
        cp.factors[N - 1].col(r) *= -1.0;
      }
    }
  }
  std::vector<int> order(R);
  std::iota(order.begin(), order.end(), 0);
  auto lex_less = [&](int a, int b) {
    for (Eigen::Index i = 0; i < cp.factors[0].rows(); ++i) {
      if (cp.factors[0](i, a) != cp.factors[0](i, b))
        return cp.factors[0](i, a) < cp.factors[0](i, b);
    }
    return false;
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (cp.weights[a] != cp.weights[b]) return cp.weights[a] > cp.weights[b];
    return lex_less(a, b);
  });
  CPDecomposition out;
  out.shape = cp.shape;
  out.weights = Vector(R);
  out.factors.assign(N, Matrix());
  for (int k = 0; k < N; ++k) out.factors[k].resize(cp.factors[k].rows(), R);
  for (int r = 0; r < R; ++r) {
    out.weights[r] = cp.weights[order[r]];
    for (int k = 0; k < N; ++k) out.factors[k].col(r) = cp.factors[k].col(order[r]);
  }
  return out;
}

/// Sufficient uniqueness bound: sum of factor k-ranks >= 2R + (N-1).
inline bool kruskal_check(const CPDecomposition& cp) {
  int sum = 0;
  for (const auto& f : cp.factors) sum += k_rank(f);
  return sum >= 2 * cp.rank() + static_cast<int>(cp.factors.size()) - 1;
}

namespace detail {

inline Matrix pseudo_inverse(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector sv = svd.singularValues();
  double tol = 1e-12 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) inv[i] = 1.0 / sv[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Khatri-Rao product of all factors except `skip`, last mode first, so the
/// columns match the unfolding order of matricize().
inline Matrix khatri_rao_others(const std::vector<Matrix>& factors, int skip, int R) {
  Matrix kr = Matrix::Ones(1, R);
  for (int k = static_cast<int>(factors.size()) - 1; k >= 0; --k) {
    if (k == skip) continue;
    kr = khatri_rao(kr, factors[k]);
  }
  return kr;
}

inline Matrix gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

inline std::vector<Matrix> init_factors(const DenseTensor& t, int R,
                                        AlsConfig::Init init, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Matrix> factors;
  for (int n = 0; n < t.order(); ++n) {
    const int rows = t.shape()[n];
    if (init == AlsConfig::Init::UnfoldingSvd) {
      Eigen::JacobiSVD<Matrix> svd(matricize(t, n), Eigen::ComputeThinU);
      Matrix f(rows, R);
      const int have = static_cast<int>(svd.matrixU().cols());
      for (int r = 0; r < R; ++r) {
        if (r < have)
          f.col(r) = svd.matrixU().col(r);
        else
          f.col(r) = gaussian_matrix(rows, 1, rng);
      }
      factors.push_back(std::move(f));
    } else {
      factors.push_back(gaussian_matrix(rows, R, rng));
    }
  }
  return factors;
}

/// Column-wise normalization, norms absorbed into weights.
inline void normalize_columns(Matrix& f, Vector& weights) {
  for (Eigen::Index r = 0; r < f.cols(); ++r) {
    double nrm = f.col(r).norm();
    weights[r] = nrm;
    if (nrm > 0) f.col(r) /= nrm;
  }
}

/// Nearest matrix with orthonormal columns (polar factor).
inline Matrix polar_orthonormal(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().transpose();
}

inline FitResult als_single(const DenseTensor& t, int R, const AlsConfig& cfg,
                            std::uint64_t seed, AlsConfig::Init init, bool orthogonal) {
  const int N = t.order();
  std::vector<Matrix> factors = init_factors(t, R, init, seed);
  Vector weights = Vector::Ones(R);
  if (orthogonal)
    for (auto& f : factors) f = polar_orthonormal(f);

  std::vector<Matrix> unfoldings;
  for (int n = 0; n < N; ++n) unfoldings.push_back(matricize(t, n));

  CPDecomposition cp{weights, factors, t.shape()};
  double loss = cp_loss(cp, t);
  std::vector<double> history;
  int iter = 0;
  bool converged = false;
  // weights folded into mode 0, used by the line-search extrapolation
  auto scaled = [&]() {
    std::vector<Matrix> s = factors;
    s[0] = factors[0] * weights.asDiagonal();
    return s;
  };
  std::vector<Matrix> prev_scaled = scaled();
  for (; iter < cfg.max_iters; ++iter) {
    for (int n = 0; n < N; ++n) {
      Matrix kr = khatri_rao_others(factors, n, R);
      if (orthogonal) {
        Matrix s = unfoldings[n] * kr;  // LS solution, Gram of others = I
        factors[n] = polar_orthonormal(s * weights.asDiagonal());
        weights = (factors[n].transpose() * s).diagonal();
      } else {
        Matrix gram = Matrix::Ones(R, R);
        for (int k = 0; k < N; ++k) {
          if (k == n) continue;
          gram = hadamard(gram, factors[k].transpose() * factors[k]);
        }
        factors[n] = unfoldings[n] * kr * pseudo_inverse(gram);
        normalize_columns(factors[n], weights);
      }
    }
    cp = CPDecomposition{weights, factors, t.shape()};
    double new_loss = cp_loss(cp, t);
    // line-search extrapolation along the last sweep direction; accepted only
    // when it lowers the loss, which cures ALS swamps without breaking the
    // monotonicity contract
    if (!orthogonal && iter >= 1) {
      std::vector<Matrix> cur = scaled();
      std::vector<Matrix> ext(N), best_ext;
      double ext_loss = new_loss;
      for (double step = 2.0; step <= 256.0; step *= 2.0) {
        for (int n = 0; n < N; ++n)
          ext[n] = prev_scaled[n] + step * (cur[n] - prev_scaled[n]);
        double l = cp_loss(CPDecomposition{Vector::Ones(R), ext, t.shape()}, t);
        if (l < ext_loss) {
          ext_loss = l;
          best_ext = ext;
        }
      }
      if (!best_ext.empty()) {
        ext = std::move(best_ext);
        weights = Vector::Ones(R);
        for (int n = 0; n < N; ++n)
          for (int r = 0; r < R; ++r) {
            double nrm = ext[n].col(r).norm();
            weights[r] *= nrm;
            if (nrm > 0) ext[n].col(r) /= nrm;
          }
        factors = std::move(ext);
        cp = CPDecomposition{weights, factors, t.shape()};
        new_loss = ext_loss;
      }
    }
    prev_scaled = scaled();
    double rel_impr = (loss - new_loss) / std::max(loss, 1e-300);
    loss = new_loss;
    history.push_back(loss);
    if (loss < 1e-28 || std::abs(rel_impr) < cfg.rel_tol) {
      converged = true;
      ++iter;
      break;
    }
  }
  FitResult res;
  res.cp = cp_canonicalize(cp);
  res.loss = loss;
  res.iterations = iter;
  res.converged = converged;
  res.loss_history = std::move(history);
  return res;
}

inline FitResult als_multi(const DenseTensor& t, int R, const AlsConfig& cfg,
                           bool orthogonal) {
  cfg.validate();
  if (R < 1) throw invalid_input("cp_als: rank must be at least 1");
  if (orthogonal)
    for (int d : t.shape())
      if (R > d) throw invalid_input("cp_als_orthogonal: rank exceeds a mode size");
  if (t.frobenius_norm() == 0.0) {
    CPDecomposition cp;
    cp.shape = t.shape();
    cp.weights = Vector::Zero(R);
    for (int d : t.shape()) {
      Matrix f = Matrix::Zero(d, R);
      for (int r = 0; r < R; ++r) f(0, r) = 1.0;
      cp.factors.push_back(std::move(f));
    }
    return FitResult{std::move(cp), 0.0, 0, true};
  }
  FitResult best;
  best.loss = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    auto init = (restart == 0 && cfg.init == AlsConfig::Init::UnfoldingSvd)
                    ? AlsConfig::Init::UnfoldingSvd
                    : AlsConfig::Init::RandomGaussian;
    FitResult r = als_single(t, R, cfg, cfg.seed + static_cast<std::uint64_t>(restart),
                             init, orthogonal);
    if (r.loss < best.loss) best = std::move(r);
    if (best.loss < 1e-24) break;  // exact fit, further restarts can't improve
  }
  return best;
}

}  // namespace detail

inline FitResult cp_als(const DenseTensor& t, int R, const AlsConfig& cfg) {
  return detail::als_multi(t, R, cfg, /*orthogonal=*/false);
}

inline FitResult cp_als_orthogonal(const DenseTensor& t, int R, const AlsConfig& cfg) {
  return detail::als_multi(t, R, cfg, /*orthogonal=*/true);
}

/// Exact decomposition of an order-2 tensor from its SVD.
namespace detail {
inline FitResult matrix_exact_fit(const DenseTensor& t) {
  Matrix m = matricize(t, 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector sv = svd.singularValues();
  double tol = kRankTol * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  int r = 0;
  while (r < sv.size() && sv[r] >= tol) ++r;
  CPDecomposition cp;
  cp.shape = t.shape();
  cp.weights = sv.head(r);
  cp.factors = {svd.matrixU().leftCols(r), svd.matrixV().leftCols(r)};
  FitResult res;
  res.cp = cp_canonicalize(cp);
  res.loss = sv.size() > r ? sv.tail(sv.size() - r).squaredNorm() : 0.0;
  res.converged = true;
  return res;
}
}  // namespace detail

/// Smallest R whose best fit reaches relative residual below the threshold.
/// Order <= 2 tensors are resolved exactly through singular values.
inline std::pair<int, FitResult> estimate_rank(const DenseTensor& t, const AlsConfig& cfg,
                                               double loss_threshold) {
  if (loss_threshold <= 0) throw invalid_input("estimate_rank: threshold must be positive");
  const double norm = t.frobenius_norm();
  if (norm == 0.0) {
    CPDecomposition cp;
    cp.shape = t.shape();
    cp.weights = Vector(0);
    for (int d : t.shape()) cp.factors.push_back(Matrix(d, 0));
    return {0, FitResult{std::move(cp), 0.0, 0, true}};
  }
  if (t.order() == 1) {
    CPDecomposition cp;
    cp.shape = t.shape();
    cp.weights = Vector::Constant(1, norm);
    cp.factors = {t.data() / norm};
    return {1, FitResult{std::move(cp), 0.0, 0, true}};
  }
  if (t.order() == 2) {
    FitResult res = detail::matrix_exact_fit(t);
    return {res.cp.rank(), std::move(res)};
  }
  Eigen::Index prod = t.size();
  int max_dim = *std::max_element(t.shape().begin(), t.shape().end());
  int r_max = static_cast<int>(std::min<Eigen::Index>(16, prod / max_dim));
  FitResult best;
  best.loss = std::numeric_limits<double>::infinity();
  for (int R = 1; R <= r_max; ++R) {
    FitResult fit = cp_als(t, R, cfg);
    if (fit.loss < best.loss) best = fit;
    if (std::sqrt(fit.loss) / norm < loss_threshold) return {R, std::move(fit)};
  }
  best.converged = false;  // no rank within the cap reached the threshold
  return {r_max, std::move(best)};
}

}  // namespace lucp
