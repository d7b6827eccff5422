#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "lucp/bloch.hpp"
#include "lucp/cp.hpp"
#include "lucp/lu_check.hpp"
#include "lucp/tensor.hpp"

namespace lucp {

using Json = nlohmann::json;

inline Json tensor_to_json(const DenseTensor& t) {
  Json j;
  j["shape"] = t.shape();
  j["data"] = std::vector<double>(t.data().data(), t.data().data() + t.size());
  return j;
}

inline DenseTensor tensor_from_json(const Json& j) {
  if (!j.contains("shape") || !j.contains("data"))
    throw invalid_input("tensor JSON requires \"shape\" and \"data\"");
  std::vector<int> shape = j.at("shape").get<std::vector<int>>();
  std::vector<double> data = j.at("data").get<std::vector<double>>();
  DenseTensor t(shape);
  if (static_cast<Eigen::Index>(data.size()) != t.size())
    throw invalid_input("tensor JSON: data length does not match shape");
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = data[i];
  return t;
}

inline Json density_to_json(const DensityMatrix& rho) {
  Json j;
  j["dims"] = rho.dims;
  Json m = Json::array();
  for (Eigen::Index r = 0; r < rho.entries.rows(); ++r)
    for (Eigen::Index c = 0; c < rho.entries.cols(); ++c)
      m.push_back({rho.entries(r, c).real(), rho.entries(r, c).imag()});
  j["matrix"] = std::move(m);
  return j;
}

inline DensityMatrix density_from_json(const Json& j) {
  if (!j.contains("dims") || !j.contains("matrix"))
    throw invalid_input("density JSON requires \"dims\" and \"matrix\"");
  std::vector<int> dims = j.at("dims").get<std::vector<int>>();
  Eigen::Index dim = 1;
  for (int d : dims) dim *= d;
  const Json& m = j.at("matrix");
  if (static_cast<Eigen::Index>(m.size()) != dim * dim)
    throw invalid_input("density JSON: matrix length does not match dims");
  CMatrix entries(dim, dim);
  Eigen::Index idx = 0;
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c, ++idx)
      entries(r, c) = Complex(m[idx][0].get<double>(), m[idx][1].get<double>());
  return DensityMatrix::create(dims, std::move(entries));
}

inline Json bloch_to_json(const BlochTensor& bt) {
  Json j = tensor_to_json(bt.tensor);
  j["dims"] = bt.dims;
  return j;
}

inline BlochTensor bloch_from_json(const Json& j) {
  if (!j.contains("dims")) throw invalid_input("bloch JSON requires \"dims\"");
  BlochTensor bt{j.at("dims").get<std::vector<int>>(), tensor_from_json(j)};
  std::vector<int> expect;
  for (int d : bt.dims) expect.push_back(d * d);
  if (bt.tensor.shape() != expect)
    throw invalid_input("bloch JSON: shape does not match dims");
  return bt;
}

inline Json cp_to_json(const CPDecomposition& cp) {
  Json j;
  j["shape"] = cp.shape;
  j["weights"] = std::vector<double>(cp.weights.data(), cp.weights.data() + cp.rank());
  Json factors = Json::array();
  for (const auto& f : cp.factors) {
    std::vector<double> flat;
    for (Eigen::Index r = 0; r < f.rows(); ++r)
      for (Eigen::Index c = 0; c < f.cols(); ++c) flat.push_back(f(r, c));
    factors.push_back(std::move(flat));
  }
  j["factors"] = std::move(factors);
  return j;
}

inline CPDecomposition cp_from_json(const Json& j) {
  if (!j.contains("shape") || !j.contains("weights") || !j.contains("factors"))
    throw invalid_input("cp JSON requires \"shape\", \"weights\" and \"factors\"");
  CPDecomposition cp;
  cp.shape = j.at("shape").get<std::vector<int>>();
  std::vector<double> w = j.at("weights").get<std::vector<double>>();
  cp.weights = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
  const Json& factors = j.at("factors");
  if (factors.size() != cp.shape.size())
    throw invalid_input("cp JSON: factor count does not match shape");
  for (size_t n = 0; n < cp.shape.size(); ++n) {
    std::vector<double> flat = factors[n].get<std::vector<double>>();
    Eigen::Index rows = cp.shape[n];
    Eigen::Index cols = cp.weights.size();
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
      throw invalid_input("cp JSON: factor size mismatch");
    Matrix f(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) f(r, c) = flat[r * cols + c];
    cp.factors.push_back(std::move(f));
  }
  return cp;
}

inline Json matrix_to_json(const Matrix& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> flat;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  j["data"] = std::move(flat);
  return j;
}

inline Json decision_to_json(const Decision& d) {
  Json j;
  switch (d.verdict) {
    case Verdict::Equivalent: j["verdict"] = "equivalent"; break;
    case Verdict::NotEquivalent: j["verdict"] = "not_equivalent"; break;
    case Verdict::Inconclusive: j["verdict"] = "inconclusive"; break;
  }
  j["reason"] = d.reason;
  j["residual"] = d.residual;
  Json w = Json::array();
  for (const auto& o : d.witnesses) w.push_back(matrix_to_json(o));
  j["witnesses"] = std::move(w);
  return j;
}

inline Json invariants_to_json(const InvariantReport& rep) {
  Json j;
  j["dims"] = rep.dims;
  j["tensor_norm"] = rep.tensor_norm;
  j["mode_norms"] = rep.mode_norms;
  j["mode_singular_values"] = rep.mode_singular_values;
  Json subs = Json::array();
  for (const auto& s : rep.subtensors) {
    Json js;
    js["modes"] = s.modes;
    js["norm"] = s.norm;
    js["rank"] = s.rank;
    js["rank_exact"] = s.rank_exact;
    js["singular_values"] = s.singular_values;
    js["k_ranks"] = s.k_ranks;
    js["weights"] = s.weights;
    js["cp_reliable"] = s.cp_reliable;
    subs.push_back(std::move(js));
  }
  j["subtensors"] = std::move(subs);
  j["gram_traces"] = rep.gram_traces;
  j["full_rank_estimate"] = rep.full_rank_estimate;
  j["full_cp_reliable"] = rep.full_cp_reliable;
  return j;
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open file: " + path);
  Json j;
  in >> j;
  return j;
}

inline void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace lucp
