#pragma once

#include <complex>
#include <limits>

#include "lucp/tensor.hpp"

namespace lucp {

using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

inline constexpr double kHermTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;

struct ValidationReport {
  double hermiticity_residual = 0.0;  // max |rho - rho^dag| entry
  double trace_deviation = 0.0;       // |Tr(rho) - 1|
  double min_eigenvalue = 0.0;
  bool ok = false;
};

inline ValidationReport validate_density(const CMatrix& m, const std::vector<int>& dims) {
  ValidationReport rep;
  Eigen::Index dim = 1;
  for (int d : dims) dim *= d;
  if (dims.empty() || m.rows() != m.cols() || m.rows() != dim) {
    rep.hermiticity_residual = std::numeric_limits<double>::infinity();
    return rep;
  }
  rep.hermiticity_residual = (m - m.adjoint()).cwiseAbs().maxCoeff();
  rep.trace_deviation = std::abs(m.trace() - Complex(1.0, 0.0));
  Eigen::SelfAdjointEigenSolver<CMatrix> es((m + m.adjoint()) / 2.0);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.ok = rep.hermiticity_residual <= kHermTol && rep.trace_deviation <= kTraceTol &&
           rep.min_eigenvalue >= -kPsdTol;
  return rep;
}

/// Complex density matrix with declared subsystem dimensions.
struct DensityMatrix {
  std::vector<int> dims;
  CMatrix entries;

  static DensityMatrix create(std::vector<int> dims, CMatrix entries) {
    ValidationReport rep = validate_density(entries, dims);
    if (!rep.ok)
      throw invalid_input("invalid density matrix: hermiticity residual " +
                          std::to_string(rep.hermiticity_residual) + ", trace deviation " +
                          std::to_string(rep.trace_deviation) + ", min eigenvalue " +
                          std::to_string(rep.min_eigenvalue));
    return DensityMatrix{std::move(dims), std::move(entries)};
  }
};

/// Orthogonal Hermitian traceless generator family for su(d), normalized to
/// Tr(g_i g_j) = 2 delta_ij. For d = 2 the familiar x/y/z ordering is kept so
/// qubit coefficient vectors line up with standard Bloch components; for
/// d >= 3 the diagonal family comes first, then the symmetric and the
/// antisymmetric off-diagonal families, each in lexicographic (m, n) order.
struct BasisSet {
  int d = 0;
  std::vector<CMatrix> generators;  // d^2 - 1 entries, identity implied at slot 0
};

inline BasisSet basis_generators(int d) {
  if (d < 2) throw invalid_input("basis_generators: dimension must be at least 2");
  std::vector<CMatrix> diag, sym, antisym;
  for (int l = 0; l + 1 < d; ++l) {
    CMatrix m = CMatrix::Zero(d, d);
    for (int j = 0; j <= l; ++j) m(j, j) = 1.0;
    m(l + 1, l + 1) = -static_cast<double>(l + 1);
    diag.push_back(std::sqrt(2.0 / ((l + 1.0) * (l + 2.0))) * m);
  }
  for (int mi = 0; mi < d; ++mi) {
    for (int ni = mi + 1; ni < d; ++ni) {
      CMatrix u = CMatrix::Zero(d, d), v = CMatrix::Zero(d, d);
      u(mi, ni) = 1.0;
      u(ni, mi) = 1.0;
      v(mi, ni) = Complex(0.0, -1.0);
      v(ni, mi) = Complex(0.0, 1.0);
      sym.push_back(std::move(u));
      antisym.push_back(std::move(v));
    }
  }
  BasisSet b;
  b.d = d;
  if (d == 2) {
    b.generators = {sym[0], antisym[0], diag[0]};  // sigma_x, sigma_y, sigma_z
  } else {
    b.generators = std::move(diag);
    b.generators.insert(b.generators.end(), sym.begin(), sym.end());
    b.generators.insert(b.generators.end(), antisym.begin(), antisym.end());
  }
  return b;
}

/// Generator for a 0-based basis slot: slot 0 is the identity.
inline CMatrix basis_element(const BasisSet& b, int slot) {
  if (slot == 0) return CMatrix::Identity(b.d, b.d);
  return b.generators.at(slot - 1);
}

/// Real coefficient tensor of a density matrix, shape (d_1^2, ..., d_N^2).
/// Slot 0 of each mode is the identity component.
struct BlochTensor {
  std::vector<int> dims;
  DenseTensor tensor;
};

inline BlochTensor extract_coefficient_tensor(const DensityMatrix& rho) {
  const int N = static_cast<int>(rho.dims.size());
  std::vector<BasisSet> bases;
  std::vector<int> shape;
  for (int d : rho.dims) {
    bases.push_back(basis_generators(d));
    shape.push_back(d * d);
  }
  DenseTensor t(shape);
  const CMatrix& m = rho.entries;
  const Eigen::Index dim = m.rows();
  // Row/column of the composite matrix split per subsystem, mode 0 slowest.
  std::vector<int> strides(N, 1);
  for (int k = N - 2; k >= 0; --k) strides[k] = strides[k + 1] * rho.dims[k + 1];
  for_each_index(shape, [&](const std::vector<int>& slot) {
    Complex acc(0.0, 0.0);
    double norm2 = 1.0;
    std::vector<CMatrix> gs;
    for (int k = 0; k < N; ++k) {
      norm2 *= (slot[k] == 0) ? rho.dims[k] : 2.0;
      gs.push_back(basis_element(bases[k], slot[k]));
    }
    for (Eigen::Index row = 0; row < dim; ++row) {
      for (Eigen::Index col = 0; col < dim; ++col) {
        // Tr(rho * G) = sum rho(row, col) * G(col, row), G a Kronecker product
        Complex g(1.0, 0.0);
        for (int k = 0; k < N; ++k) {
          int i = static_cast<int>(col / strides[k]) % rho.dims[k];
          int j = static_cast<int>(row / strides[k]) % rho.dims[k];
          g *= gs[k](i, j);
          if (g == Complex(0.0, 0.0)) break;
        }
        acc += m(row, col) * g;
      }
    }
    Complex x = acc / norm2;
    if (std::abs(x.imag()) > 1e-10)
      throw numerical_error("coefficient has residual imaginary part " +
                            std::to_string(x.imag()));
    t(slot) = x.real();
  });
  return BlochTensor{rho.dims, std::move(t)};
}

inline DensityMatrix reconstruct_density(const BlochTensor& bt) {
  const int N = static_cast<int>(bt.dims.size());
  std::vector<int> expected;
  for (int d : bt.dims) expected.push_back(d * d);
  if (bt.tensor.shape() != expected)
    throw invalid_input("reconstruct_density: tensor shape does not match dims");
  std::vector<BasisSet> bases;
  Eigen::Index dim = 1;
  for (int d : bt.dims) {
    bases.push_back(basis_generators(d));
    dim *= d;
  }
  std::vector<int> strides(N, 1);
  for (int k = N - 2; k >= 0; --k) strides[k] = strides[k + 1] * bt.dims[k + 1];
  CMatrix m = CMatrix::Zero(dim, dim);
  for_each_index(bt.tensor.shape(), [&](const std::vector<int>& slot) {
    double x = bt.tensor(slot);
    if (x == 0.0) return;
    std::vector<CMatrix> gs;
    for (int k = 0; k < N; ++k) gs.push_back(basis_element(bases[k], slot[k]));
    for (Eigen::Index row = 0; row < dim; ++row) {
      for (Eigen::Index col = 0; col < dim; ++col) {
        Complex g(1.0, 0.0);
        for (int k = 0; k < N; ++k) {
          int i = static_cast<int>(row / strides[k]) % bt.dims[k];
          int j = static_cast<int>(col / strides[k]) % bt.dims[k];
          g *= gs[k](i, j);
          if (g == Complex(0.0, 0.0)) break;
        }
        m(row, col) += x * g;
      }
    }
  });
  return DensityMatrix::create(bt.dims, std::move(m));
}

/// Strictly increasing 0-based mode list selecting the non-identity slots.
struct SubtensorKey {
  std::vector<int> modes;
};

/// Coefficient subarray with non-identity indices on the key's modes and the
/// identity slot everywhere else; shape (d_{j}^2 - 1) per selected mode.
inline DenseTensor subtensor(const BlochTensor& bt, const SubtensorKey& key) {
  const int N = static_cast<int>(bt.dims.size());
  if (key.modes.empty()) throw invalid_input("subtensor: empty mode list");
  for (size_t i = 0; i < key.modes.size(); ++i) {
    if (key.modes[i] < 0 || key.modes[i] >= N)
      throw invalid_input("subtensor: mode out of range");
    if (i > 0 && key.modes[i] <= key.modes[i - 1])
      throw invalid_input("subtensor: modes must be strictly increasing");
  }
  std::vector<int> shape;
  for (int m : key.modes) shape.push_back(bt.dims[m] * bt.dims[m] - 1);
  DenseTensor out(shape);
  std::vector<int> full(N, 0);
  for_each_index(shape, [&](const std::vector<int>& idx) {
    for (size_t i = 0; i < key.modes.size(); ++i) full[key.modes[i]] = idx[i] + 1;
    out(idx) = bt.tensor(full);
  });
  return out;
}

}  // namespace lucp
