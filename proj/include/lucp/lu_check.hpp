#pragma once

#include <map>
#include <optional>
#include <random>

#include "lucp/bloch.hpp"
#include "lucp/cp.hpp"
#include "lucp/tensor.hpp"

namespace lucp {

inline constexpr double kOrthTol = 1e-10;

/// Real orthogonal matrix induced on the generator basis by conjugation:
/// O(j, i) = Tr(g_j U g_i U^dag) / 2, so coefficient vectors transform as
/// x' = O x when the state is conjugated by U.
inline Matrix adjoint_rotation(const CMatrix& u) {
  const int d = static_cast<int>(u.rows());
  if (u.cols() != d || (u.adjoint() * u - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-8)
    throw invalid_input("adjoint_rotation: input is not unitary");
  BasisSet b = basis_generators(d);
  const int n = static_cast<int>(b.generators.size());
  Matrix o(n, n);
  for (int i = 0; i < n; ++i) {
    CMatrix conj = u * b.generators[i] * u.adjoint();
    for (int j = 0; j < n; ++j) o(j, i) = 0.5 * (b.generators[j] * conj).trace().real();
  }
  return o;
}

/// Extends a generator-basis rotation to the full coefficient space by
/// fixing the identity slot: diag(1, O).
inline Matrix block_extend(const Matrix& o) {
  Matrix m = Matrix::Zero(o.rows() + 1, o.cols() + 1);
  m(0, 0) = 1.0;
  m.block(1, 1, o.rows(), o.cols()) = o;
  return m;
}

struct LocalUnitary {
  std::vector<int> dims;
  std::vector<CMatrix> factors;
};

inline DensityMatrix apply_local_unitary(const DensityMatrix& rho, const LocalUnitary& u) {
  if (rho.dims != u.dims) throw invalid_input("apply_local_unitary: dimension mismatch");
  CMatrix full = CMatrix::Identity(1, 1);
  for (const auto& f : u.factors) {
    CMatrix next(full.rows() * f.rows(), full.cols() * f.cols());
    for (Eigen::Index i = 0; i < full.rows(); ++i)
      for (Eigen::Index j = 0; j < full.cols(); ++j)
        next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = full(i, j) * f;
    full = std::move(next);
  }
  return DensityMatrix::create(rho.dims, full * rho.entries * full.adjoint());
}

namespace detail {

inline CMatrix complex_gaussian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  CMatrix m(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double re = dist(rng), im = dist(rng);
      m(i, j) = Complex(re, im);
    }
  return m;
}

inline CMatrix haar_special_unitary(int d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<CMatrix> qr(complex_gaussian(d, rng));
  CMatrix q = qr.householderQ();
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j) q.col(j) *= r(j, j) / std::abs(r(j, j));
  Complex det = q.determinant();
  q /= std::pow(det, 1.0 / d);
  return q;
}

}  // namespace detail

/// Haar-distributed special unitary per subsystem; deterministic in the seed.
inline LocalUnitary random_local_unitary(const std::vector<int>& dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LocalUnitary u;
  u.dims = dims;
  for (int d : dims) u.factors.push_back(detail::haar_special_unitary(d, rng));
  return u;
}

/// Random full-rank mixed state, deterministic in the seed.
inline DensityMatrix random_density(const std::vector<int>& dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  Eigen::Index dim = 1;
  for (int d : dims) dim *= d;
  CMatrix g = detail::complex_gaussian(static_cast<int>(dim), rng);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace();
  return DensityMatrix::create(dims, std::move(rho));
}

/// Non-empty mode subsets of {0..N-1}, ordered by size then lexicographically.
inline std::vector<std::vector<int>> all_subtensor_keys(int n_modes) {
  std::vector<std::vector<int>> keys;
  for (int mask = 1; mask < (1 << n_modes); ++mask) {
    std::vector<int> key;
    for (int k = 0; k < n_modes; ++k)
      if (mask & (1 << k)) key.push_back(k);
    keys.push_back(std::move(key));
  }
  std::stable_sort(keys.begin(), keys.end(),
                   [](const auto& a, const auto& b) { return a.size() < b.size(); });
  return keys;
}

// ---------------------------------------------------------------------------
// Invariants
// ---------------------------------------------------------------------------

struct SubtensorInvariants {
  std::vector<int> modes;
  double norm = 0.0;
  int rank = 0;
  bool rank_exact = false;             // true for order <= 2 (spectral rank)
  std::vector<double> singular_values; // order-2 subtensors only
  std::vector<int> k_ranks;            // per CP factor, when a fit exists
  std::vector<double> weights;         // canonical weight multiset
  bool cp_reliable = false;
};

struct InvariantReport {
  std::vector<int> dims;
  double tensor_norm = 0.0;
  std::vector<double> mode_norms;                    // full-tensor matricizations
  std::vector<std::vector<double>> mode_singular_values;
  std::vector<SubtensorInvariants> subtensors;
  std::vector<double> gram_traces;                   // per factor of full-tensor CP
  int full_rank_estimate = 0;
  bool full_cp_reliable = false;
};

inline constexpr double kRankLossThreshold = 1e-8;

/// All LU invariants of one state. `with_cp` disables the ALS-derived fields
/// (ranks of order >= 3 subtensors, k-ranks, weights, Gram traces), leaving
/// only the exact and spectral quantities.
inline InvariantReport compute_invariants(const BlochTensor& bt, const AlsConfig& cfg,
                                          bool with_cp = true) {
  InvariantReport rep;
  rep.dims = bt.dims;
  rep.tensor_norm = bt.tensor.frobenius_norm();
  const int N = static_cast<int>(bt.dims.size());
  for (int n = 0; n < N; ++n) {
    Matrix m = matricize(bt.tensor, n);
    rep.mode_norms.push_back(m.norm());
    Vector sv = singular_values(m);
    rep.mode_singular_values.emplace_back(sv.data(), sv.data() + sv.size());
  }
  for (const auto& key : all_subtensor_keys(N)) {
    DenseTensor sub = subtensor(bt, SubtensorKey{key});
    SubtensorInvariants si;
    si.modes = key;
    si.norm = sub.frobenius_norm();
    if (key.size() == 1) {
      si.rank = si.norm > kRankTol ? 1 : 0;
      si.rank_exact = true;
      if (with_cp && si.rank == 1) {
        si.k_ranks = {1};
        si.weights = {si.norm};
        si.cp_reliable = true;
      }
    } else if (key.size() == 2) {
      Matrix m = matricize(sub, 0);
      Vector sv = singular_values(m);
      si.singular_values.assign(sv.data(), sv.data() + sv.size());
      si.rank = numeric_rank(m);
      si.rank_exact = true;
      if (with_cp) {
        auto [r, fit] = estimate_rank(sub, cfg, kRankLossThreshold);
        for (const auto& f : fit.cp.factors) si.k_ranks.push_back(k_rank(f));
        si.weights.assign(fit.cp.weights.data(), fit.cp.weights.data() + fit.cp.rank());
        si.cp_reliable = fit.converged;
      }
    } else if (with_cp) {
      auto [r, fit] = estimate_rank(sub, cfg, kRankLossThreshold);
      si.rank = r;
      si.rank_exact = false;
      for (const auto& f : fit.cp.factors) si.k_ranks.push_back(k_rank(f));
      si.weights.assign(fit.cp.weights.data(), fit.cp.weights.data() + fit.cp.rank());
      si.cp_reliable = fit.converged;
    }
    rep.subtensors.push_back(std::move(si));
  }
  if (with_cp) {
    auto [r, fit] = estimate_rank(bt.tensor, cfg, kRankLossThreshold);
    rep.full_rank_estimate = r;
    rep.full_cp_reliable = fit.converged;
    for (const auto& f : fit.cp.factors)
      rep.gram_traces.push_back((f.transpose() * f).trace());
  }
  return rep;
}

namespace detail {
inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline bool close_all(const std::vector<double>& a, const std::vector<double>& b,
                      double tol) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!close(a[i], b[i], tol)) return false;
  return true;
}
}  // namespace detail

/// First violated necessary condition, or nullopt. Exact and spectral
/// quantities are compared at tol; ALS-derived quantities (k-ranks, weight
/// multisets) are compared at 10x tol and only when both fits converged —
/// callers deciding equivalence must not turn those into a NotEquivalent
/// verdict, since a local minimum could manufacture a counterexample.
inline std::optional<std::string> screen_invariants(const InvariantReport& a,
                                                    const InvariantReport& b, double tol) {
  if (a.dims != b.dims) return "dims-mismatch";
  if (!detail::close(a.tensor_norm, b.tensor_norm, tol)) return "norm-mismatch";
  if (!detail::close_all(a.mode_norms, b.mode_norms, tol))
    return "matricization-norm-mismatch";
  for (size_t n = 0; n < a.mode_singular_values.size(); ++n)
    if (!detail::close_all(a.mode_singular_values[n], b.mode_singular_values[n], tol))
      return "singular-value-mismatch";
  for (size_t s = 0; s < a.subtensors.size(); ++s) {
    const auto& sa = a.subtensors[s];
    const auto& sb = b.subtensors[s];
    if (!detail::close(sa.norm, sb.norm, tol)) return "subtensor-norm-mismatch";
    if (!detail::close_all(sa.singular_values, sb.singular_values, tol))
      return "subtensor-singular-value-mismatch";
    if (sa.rank_exact && sb.rank_exact && sa.rank != sb.rank) return "rank-mismatch";
  }
  for (size_t s = 0; s < a.subtensors.size(); ++s) {
    const auto& sa = a.subtensors[s];
    const auto& sb = b.subtensors[s];
    if (!sa.cp_reliable || !sb.cp_reliable) continue;
    if (sa.k_ranks != sb.k_ranks) return "k-rank-mismatch";
    if (!detail::close_all(sa.weights, sb.weights, 10.0 * tol)) return "weight-mismatch";
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Orthogonal alignment
// ---------------------------------------------------------------------------

struct AlignmentResult {
  Matrix rotation;           // orthogonal, acting on the left: rotation * A = Aprime
  bool special = true;       // det +1; false means only a reflection aligns
  double residual = 0.0;     // max |rotation * A - Aprime|
};

/// Finds an orthogonal O with O A = Aprime, given matching Gram matrices.
/// The completion on the orthogonal complement of the column space is chosen
/// to force det +1 whenever the complement is non-trivial.
inline std::optional<AlignmentResult> solve_orthogonal_alignment(const Matrix& a,
                                                                 const Matrix& aprime,
                                                                 double tol = 1e-8) {
  if (a.rows() != aprime.rows() || a.cols() != aprime.cols()) return std::nullopt;
  double scale = std::max(1.0, a.norm());
  if ((a.transpose() * a - aprime.transpose() * aprime).cwiseAbs().maxCoeff() > tol * scale)
    return std::nullopt;
  const Eigen::Index n = a.rows();
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeThinV);
  Vector sv = svd.singularValues();
  double rank_tol = kRankTol * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv[r] >= rank_tol) ++r;
  Matrix basis_a(n, n);
  basis_a.leftCols(r) = svd.matrixU().leftCols(r);
  basis_a.rightCols(n - r) = svd.matrixU().rightCols(n - r);
  // Left singular vectors of aprime consistent with a's right singular vectors.
  Matrix u_prime = aprime * svd.matrixV().leftCols(r) *
                   sv.head(r).cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Matrix> svdp(aprime, Eigen::ComputeFullU);
  Matrix basis_b(n, n);
  basis_b.leftCols(r) = u_prime;
  basis_b.rightCols(n - r) = svdp.matrixU().rightCols(n - r);
  Matrix o = basis_b * basis_a.transpose();
  AlignmentResult res;
  if (o.determinant() < 0) {
    if (r < n) {
      basis_b.col(n - 1) *= -1.0;
      o = basis_b * basis_a.transpose();
    } else {
      res.special = false;
    }
  }
  res.rotation = o;
  res.residual = (o * a - aprime).cwiseAbs().maxCoeff();
  if (res.residual > tol * scale) return std::nullopt;
  return res;
}

// ---------------------------------------------------------------------------
// Gram criteria
// ---------------------------------------------------------------------------

/// Factor matrices per subtensor key (one matrix per mode in the key).
using FactorFamily = std::map<std::vector<int>, std::vector<Matrix>>;

/// Checks the per-key Gram equalities and the cross-Gram equalities against
/// the full-key factors. Any shape or rank mismatch yields false.
inline bool gram_criteria(const FactorFamily& fam_a, const FactorFamily& fam_b,
                          double tol) {
  if (fam_a.size() != fam_b.size()) return false;
  std::vector<int> full_key;
  for (const auto& [key, factors] : fam_a)
    if (key.size() > full_key.size()) full_key = key;
  auto full_a = fam_a.find(full_key);
  auto full_b = fam_b.find(full_key);
  if (full_a == fam_a.end() || full_b == fam_b.end()) return false;
  for (const auto& [key, factors_a] : fam_a) {
    auto it = fam_b.find(key);
    if (it == fam_b.end()) return false;
    const auto& factors_b = it->second;
    if (factors_a.size() != key.size() || factors_b.size() != key.size()) return false;
    for (size_t i = 0; i < key.size(); ++i) {
      const Matrix& fa = factors_a[i];
      const Matrix& fb = factors_b[i];
      if (fa.rows() != fb.rows() || fa.cols() != fb.cols()) return false;
      if ((fa.transpose() * fa - fb.transpose() * fb).cwiseAbs().maxCoeff() > tol)
        return false;
      // cross-Gram against the full-key factor on the same mode
      size_t pos = std::find(full_key.begin(), full_key.end(), key[i]) - full_key.begin();
      const Matrix& ga = full_a->second[pos];
      const Matrix& gb = full_b->second[pos];
      if (ga.rows() != fa.rows() || gb.rows() != fb.rows() || ga.cols() != gb.cols())
        return false;
      if ((ga.transpose() * fa - gb.transpose() * fb).cwiseAbs().maxCoeff() > tol)
        return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Equivalence decision
// ---------------------------------------------------------------------------

enum class Verdict { Equivalent, NotEquivalent, Inconclusive };

struct Decision {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<Matrix> witnesses;  // one rotation per subsystem when Equivalent
  double residual = 0.0;
  std::string reason;
};

namespace detail {

/// SO-constrained Procrustes projection: nearest rotation to F.
inline Matrix so_polar(const Matrix& f) {
  Eigen::JacobiSVD<Matrix> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix u = svd.matrixU(), v = svd.matrixV();
  Vector d = Vector::Ones(f.rows());
  d[f.rows() - 1] = (u * v.transpose()).determinant() < 0 ? -1.0 : 1.0;
  return u * d.asDiagonal() * v.transpose();
}

struct SubtensorSource {
  std::vector<int> key;
  double weight;
  DenseTensor sub_a, sub_b;
};

inline std::vector<SubtensorSource> collect_sources(const BlochTensor& a,
                                                    const BlochTensor& b) {
  std::vector<SubtensorSource> out;
  auto keys = all_subtensor_keys(static_cast<int>(a.dims.size()));
  for (size_t i = 0; i < keys.size(); ++i) {
    SubtensorSource s;
    s.key = keys[i];
    s.weight = 1.0 / (static_cast<double>(i) + 1.3);
    s.sub_a = subtensor(a, SubtensorKey{keys[i]});
    s.sub_b = subtensor(b, SubtensorKey{keys[i]});
    out.push_back(std::move(s));
  }
  return out;
}

/// Rotation candidates for one subsystem from the eigenstructure of a
/// weighted second-moment matrix of everything that transforms with it.
/// Degenerate eigenvalue blocks are resolved against the first-order
/// subtensor where possible, with the residual sign ambiguity enumerated.
inline std::vector<Matrix> mode_candidates(const std::vector<SubtensorSource>& sources,
                                           int mode, int gen_dim, size_t cap = 64) {
  Matrix g = Matrix::Zero(gen_dim, gen_dim), gp = g;
  Vector va = Vector::Zero(gen_dim), vb = va;
  for (const auto& s : sources) {
    auto pos_it = std::find(s.key.begin(), s.key.end(), mode);
    if (pos_it == s.key.end()) continue;
    int p = static_cast<int>(pos_it - s.key.begin());
    Matrix ma = matricize(s.sub_a, p);
    Matrix mb = matricize(s.sub_b, p);
    g += s.weight * ma * ma.transpose();
    gp += s.weight * mb * mb.transpose();
    if (s.key.size() == 1) {
      va = ma.col(0);
      vb = mb.col(0);
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> ea(g), eb(gp);
  double scale = std::max(1.0, ea.eigenvalues().cwiseAbs().maxCoeff());
  if ((ea.eigenvalues() - eb.eigenvalues()).cwiseAbs().maxCoeff() > 1e-7 * scale)
    return {};
  // group adjacent eigenvalues into degenerate blocks
  std::vector<std::pair<int, int>> blocks;
  int start = 0;
  for (int i = 1; i <= gen_dim; ++i) {
    if (i == gen_dim || ea.eigenvalues()[i] - ea.eigenvalues()[i - 1] > 1e-8 * scale) {
      blocks.emplace_back(start, i);
      start = i;
    }
  }
  std::vector<std::vector<Matrix>> choices;
  for (auto [lo, hi] : blocks) {
    int m = hi - lo;
    Vector r = ea.eigenvectors().middleCols(lo, m).transpose() * va;
    Vector rp = eb.eigenvectors().middleCols(lo, m).transpose() * vb;
    std::vector<Matrix> opts;
    if (m == 1) {
      if (std::abs(r[0]) > 1e-8 && std::abs(rp[0]) > 1e-8) {
        opts.push_back(Matrix::Constant(1, 1, r[0] * rp[0] > 0 ? 1.0 : -1.0));
      } else {
        opts.push_back(Matrix::Constant(1, 1, 1.0));
        opts.push_back(Matrix::Constant(1, 1, -1.0));
      }
    } else if (r.norm() > 1e-8 && rp.norm() > 1e-8) {
      Matrix q = so_polar(rp * r.transpose());
      opts.push_back(q);
      // opposite-parity variant that still maps r onto rp
      Eigen::JacobiSVD<Matrix> svd(rp * r.transpose(), Eigen::ComputeFullV);
      Vector u = svd.matrixV().col(m - 1);
      opts.push_back(q * (Matrix::Identity(m, m) - 2.0 * u * u.transpose()));
    } else {
      opts.push_back(Matrix::Identity(m, m));
      Matrix flip = Matrix::Identity(m, m);
      flip(m - 1, m - 1) = -1.0;
      opts.push_back(flip);
    }
    choices.push_back(std::move(opts));
  }
  std::vector<Matrix> cands;
  std::vector<size_t> pick(choices.size(), 0);
  for (;;) {
    Matrix b = Matrix::Zero(gen_dim, gen_dim);
    for (size_t c = 0; c < blocks.size(); ++c)
      b.block(blocks[c].first, blocks[c].first, blocks[c].second - blocks[c].first,
              blocks[c].second - blocks[c].first) = choices[c][pick[c]];
    cands.push_back(eb.eigenvectors() * b * ea.eigenvectors().transpose());
    if (cands.size() >= cap) break;
    int c = static_cast<int>(choices.size()) - 1;
    while (c >= 0 && ++pick[c] == choices[c].size()) pick[c--] = 0;
    if (c < 0) break;
  }
  return cands;
}

/// Kronecker chain of the rotations on a key's other modes, ordered to match
/// the unfolding column order (earlier modes fastest).
inline Matrix kron_others(const std::vector<Matrix>& rotations, const std::vector<int>& key,
                          int skip_mode) {
  Matrix k = Matrix::Identity(1, 1);
  for (auto it = key.rbegin(); it != key.rend(); ++it) {
    if (*it == skip_mode) continue;
    k = kronecker(k, rotations[*it]);
  }
  return k;
}

/// One alternating pass: each rotation re-solved as an SO-constrained
/// Procrustes fit over all subtensors involving it, others held fixed.
inline void refine_rotations(std::vector<Matrix>& rotations,
                             const std::vector<SubtensorSource>& sources) {
  for (size_t k = 0; k < rotations.size(); ++k) {
    const int mode = static_cast<int>(k);
    Matrix f = Matrix::Zero(rotations[k].rows(), rotations[k].cols());
    for (const auto& s : sources) {
      auto pos_it = std::find(s.key.begin(), s.key.end(), mode);
      if (pos_it == s.key.end()) continue;
      int p = static_cast<int>(pos_it - s.key.begin());
      Matrix ma = matricize(s.sub_a, p);
      Matrix mb = matricize(s.sub_b, p);
      f += s.weight * mb * kron_others(rotations, s.key, mode) * ma.transpose();
    }
    rotations[k] = so_polar(f);
  }
}

inline double verify_rotations(const std::vector<Matrix>& rotations, const BlochTensor& a,
                               const BlochTensor& b) {
  std::vector<Matrix> extended;
  for (const auto& o : rotations) extended.push_back(block_extend(o));
  DenseTensor mapped = multilinear_apply(extended, a.tensor);
  return (mapped.data() - b.tensor.data()).cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Full equivalence decision: invariant screening, witness search by
/// eigen-structure candidates plus alternating rotation refinement, and a
/// direct tensor-level verification of any accepted witness tuple.
inline Decision check_lu_equivalence(const DensityMatrix& rho_a, const DensityMatrix& rho_b,
                                     const AlsConfig& cfg, double tol = 1e-8) {
  if (rho_a.dims != rho_b.dims) throw invalid_input("check_lu_equivalence: dims mismatch");
  BlochTensor bt_a = extract_coefficient_tensor(rho_a);
  BlochTensor bt_b = extract_coefficient_tensor(rho_b);

  InvariantReport rep_a = compute_invariants(bt_a, cfg, /*with_cp=*/false);
  InvariantReport rep_b = compute_invariants(bt_b, cfg, /*with_cp=*/false);
  if (auto reason = screen_invariants(rep_a, rep_b, tol)) {
    Decision d;
    d.verdict = Verdict::NotEquivalent;
    d.reason = *reason;
    return d;
  }

  const int N = static_cast<int>(rho_a.dims.size());
  auto sources = detail::collect_sources(bt_a, bt_b);
  std::vector<std::vector<Matrix>> candidates;
  bool missing = false;
  for (int k = 0; k < N; ++k) {
    candidates.push_back(detail::mode_candidates(sources, k, rho_a.dims[k] * rho_a.dims[k] - 1));
    if (candidates.back().empty()) missing = true;
  }

  const double norm_scale = std::max(1.0, bt_a.tensor.frobenius_norm());
  if (!missing) {
    std::vector<size_t> pick(N, 0);
    size_t tried = 0;
    for (;;) {
      std::vector<Matrix> rotations;
      for (int k = 0; k < N; ++k) rotations.push_back(candidates[k][pick[k]]);
      for (int round = 0; round < 30; ++round) {
        detail::refine_rotations(rotations, sources);
        if (detail::verify_rotations(rotations, bt_a, bt_b) < 1e-11 * norm_scale) break;
      }
      double residual = detail::verify_rotations(rotations, bt_a, bt_b);
      if (residual <= tol * norm_scale) {
        Decision d;
        d.verdict = Verdict::Equivalent;
        d.witnesses = std::move(rotations);
        d.residual = residual;
        return d;
      }
      if (++tried >= 256) break;
      int c = N - 1;
      while (c >= 0 && ++pick[c] == candidates[c].size()) pick[c--] = 0;
      if (c < 0) break;
    }
  }

  // No candidate verified and no invariant separates the states: check the
  // genericity preconditions to pick the failure reason.
  Decision d;
  d.verdict = Verdict::Inconclusive;
  bool generic = !missing;
  for (const auto& s : sources) {
    if (s.key.size() != 2) continue;
    Matrix m = matricize(s.sub_a, 0);
    if (numeric_rank(m) < std::min(m.rows(), m.cols())) generic = false;
  }
  if (generic) {
    auto full_key = all_subtensor_keys(N).back();
    auto [r, fit] = estimate_rank(subtensor(bt_a, SubtensorKey{full_key}), cfg,
                                  kRankLossThreshold);
    if (!fit.converged || !kruskal_check(fit.cp)) generic = false;
  }
  d.reason = generic ? "alignment-failed" : "non-generic";
  return d;
}

}  // namespace lucp
