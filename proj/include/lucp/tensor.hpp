#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace lucp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class invalid_input : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Relative threshold below which a singular value is treated as zero.
inline constexpr double kRankTol = 1e-10;

/// Dense real N-way array. Entries are stored flat with mode 0 slowest,
/// the last mode fastest. Modes are addressed 0-based throughout.
class DenseTensor {
 public:
  DenseTensor() = default;

  explicit DenseTensor(std::vector<int> shape)
      : shape_(std::move(shape)), data_(Vector::Zero(count(shape_))) {
    check_shape();
  }

  DenseTensor(std::vector<int> shape, Vector data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (data_.size() != count(shape_))
      throw invalid_input("tensor data length does not match shape");
  }

  int order() const { return static_cast<int>(shape_.size()); }
  Eigen::Index size() const { return data_.size(); }
  const std::vector<int>& shape() const { return shape_; }
  const Vector& data() const { return data_; }
  Vector& data() { return data_; }

  Eigen::Index flat_index(const std::vector<int>& idx) const {
    Eigen::Index off = 0;
    for (int k = 0; k < order(); ++k) off = off * shape_[k] + idx[k];
    return off;
  }

  double operator()(const std::vector<int>& idx) const { return data_[flat_index(idx)]; }
  double& operator()(const std::vector<int>& idx) { return data_[flat_index(idx)]; }

  double frobenius_norm() const { return data_.norm(); }

  bool same_shape(const DenseTensor& other) const { return shape_ == other.shape_; }

 private:
  static Eigen::Index count(const std::vector<int>& s) {
    Eigen::Index n = 1;
    for (int d : s) n *= d;
    return n;
  }
  void check_shape() const {
    if (shape_.empty()) throw invalid_input("tensor order must be at least 1");
    for (int d : shape_)
      if (d < 1) throw invalid_input("tensor mode sizes must be positive");
  }

  std::vector<int> shape_;
  Vector data_;
};

/// Visits every multi-index of `shape` in flat (mode 0 slowest) order.
template <typename F>
void for_each_index(const std::vector<int>& shape, F&& fn) {
  std::vector<int> idx(shape.size(), 0);
  for (;;) {
    fn(idx);
    int k = static_cast<int>(shape.size()) - 1;
    while (k >= 0 && ++idx[k] == shape[k]) idx[k--] = 0;
    if (k < 0) break;
  }
}

inline DenseTensor outer_product(const std::vector<Vector>& vectors) {
  if (vectors.empty()) throw invalid_input("outer_product needs at least one vector");
  std::vector<int> shape;
  for (const auto& v : vectors) {
    if (v.size() == 0) throw invalid_input("outer_product: empty vector");
    shape.push_back(static_cast<int>(v.size()));
  }
  DenseTensor t(shape);
  for_each_index(shape, [&](const std::vector<int>& idx) {
    double p = 1.0;
    for (size_t k = 0; k < vectors.size(); ++k) p *= vectors[k][idx[k]];
    t(idx) = p;
  });
  return t;
}

/// Column index of the mode-n unfolding: earlier modes vary fastest.
inline Eigen::Index unfold_column(const std::vector<int>& shape, int mode,
                                  const std::vector<int>& idx) {
  Eigen::Index j = 0, stride = 1;
  for (int k = 0; k < static_cast<int>(shape.size()); ++k) {
    if (k == mode) continue;
    j += idx[k] * stride;
    stride *= shape[k];
  }
  return j;
}

inline Matrix matricize(const DenseTensor& t, int mode) {
  if (mode < 0 || mode >= t.order()) throw invalid_input("matricize: mode out of range");
  const auto& shape = t.shape();
  Matrix m = Matrix::Zero(shape[mode], t.size() / shape[mode]);
  for_each_index(shape, [&](const std::vector<int>& idx) {
    m(idx[mode], unfold_column(shape, mode, idx)) = t(idx);
  });
  return m;
}

inline DenseTensor fold(const Matrix& m, int mode, const std::vector<int>& shape) {
  if (mode < 0 || mode >= static_cast<int>(shape.size()))
    throw invalid_input("fold: mode out of range");
  DenseTensor t(shape);
  if (m.rows() != shape[mode] || m.rows() * m.cols() != t.size())
    throw invalid_input("fold: matrix dimensions inconsistent with shape");
  for_each_index(shape, [&](const std::vector<int>& idx) {
    t(idx) = m(idx[mode], unfold_column(shape, mode, idx));
  });
  return t;
}

inline Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix khatri_rao(const Matrix& p, const Matrix& q) {
  if (p.cols() != q.cols()) throw invalid_input("khatri_rao: column counts differ");
  Matrix out(p.rows() * q.rows(), p.cols());
  for (Eigen::Index r = 0; r < p.cols(); ++r)
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      out.col(r).segment(i * q.rows(), q.rows()) = p(i, r) * q.col(r);
  return out;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw invalid_input("hadamard: dimension mismatch");
  return a.cwiseProduct(b);
}

/// Mode-n product: contracts `a` with mode `mode` of `t`.
inline DenseTensor mode_product(const Matrix& a, const DenseTensor& t, int mode) {
  if (a.cols() != t.shape()[mode])
    throw invalid_input("mode_product: size mismatch on mode " + std::to_string(mode));
  std::vector<int> out_shape = t.shape();
  out_shape[mode] = static_cast<int>(a.rows());
  return fold(a * matricize(t, mode), mode, out_shape);
}

inline DenseTensor multilinear_apply(const std::vector<Matrix>& matrices,
                                     const DenseTensor& t) {
  if (static_cast<int>(matrices.size()) != t.order())
    throw invalid_input("multilinear_apply: one matrix per mode required");
  DenseTensor out = t;
  for (int n = 0; n < t.order(); ++n) out = mode_product(matrices[n], out, n);
  return out;
}

inline Vector singular_values(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues();
}

inline int numeric_rank(const Matrix& a) {
  if (a.size() == 0) return 0;
  Vector sv = singular_values(a);
  double tol = kRankTol * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] >= tol) ++r;
  return r;
}

/// Largest r such that every r-subset of columns is linearly independent.
/// Exhaustive over subsets; intended for matrices with at most ~16 columns.
inline int k_rank(const Matrix& a) {
  const int cols = static_cast<int>(a.cols());
  if (cols == 0) return 0;
  for (int j = 0; j < cols; ++j)
    if (a.col(j).norm() < kRankTol) return 0;
  const int cap = std::min<int>(cols, static_cast<int>(a.rows()));
  for (int r = 2; r <= cap; ++r) {
    // enumerate r-subsets of columns
    std::vector<int> pick(r);
    std::iota(pick.begin(), pick.end(), 0);
    for (;;) {
      Matrix sub(a.rows(), r);
      for (int c = 0; c < r; ++c) sub.col(c) = a.col(pick[c]);
      if (numeric_rank(sub) < r) return r - 1;
      int i = r - 1;
      while (i >= 0 && pick[i] == cols - r + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int c = i + 1; c < r; ++c) pick[c] = pick[c - 1] + 1;
    }
  }
  return cap;
}

}  // namespace lucp
