// Copyright 2026 The ethsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ethsim/operator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "ethsim/error.hpp"

namespace ethsim {

namespace {

void require_same_dim(const Operator& a, const Operator& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) +
                          " vs " + std::to_string(b.dim()) + ")");
  }
}

}  // namespace

Operator::Operator(Matrix m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    throw InvalidArgument("Operator: matrix must be square and non-empty, got " +
                          std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
  }
}

Operator Operator::identity(std::size_t dim) {
  return Operator(Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

Operator Operator::zero(std::size_t dim) {
  return Operator(Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

Operator Operator::diagonal(std::span<const Complex> entries) {
  Vector v(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) v(static_cast<Eigen::Index>(i)) = entries[i];
  return Operator(Matrix(v.asDiagonal()));
}

Operator Operator::diagonal(std::initializer_list<double> entries) {
  std::vector<Complex> c(entries.begin(), entries.end());
  return diagonal(std::span<const Complex>(c));
}

Operator Operator::from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, n);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != n) {
      throw InvalidArgument("Operator::from_rows: ragged or non-square literal");
    }
    Eigen::Index j = 0;
    for (const auto& x : row) m(i, j++) = x;
    ++i;
  }
  return Operator(std::move(m));
}

Operator Operator::outer(const Vector& a, const Vector& b) { return Operator(a * b.adjoint()); }

Operator Operator::unit(std::size_t dim, std::size_t row, std::size_t col) {
  Operator e = zero(dim);
  e.m_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = 1.0;
  return e;
}

double Operator::hermiticity_defect() const {
  return operator_norm(Operator(0.5 * (m_ - m_.adjoint())));
}

bool Operator::is_hermitian(double tol) const {
  return hermiticity_defect() <= tol * std::max(1.0, operator_norm(*this));
}

bool Operator::is_projection(double tol) const {
  return is_hermitian(tol) && (m_ * m_ - m_).norm() <= tol * std::max(1.0, m_.norm());
}

bool Operator::is_unitary(double tol) const {
  const auto n = m_.rows();
  return (m_.adjoint() * m_ - Matrix::Identity(n, n)).norm() <= tol * std::sqrt(double(n));
}

Operator operator+(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "operator+");
  return Operator(a.m_ + b.m_);
}

Operator operator-(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "operator-");
  return Operator(a.m_ - b.m_);
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "operator*");
  return Operator(a.m_ * b.m_);
}

Operator operator*(Complex s, const Operator& a) { return Operator(s * a.m_); }

Complex hs_inner(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "hs_inner");
  return (a.matrix().conjugate().cwiseProduct(b.matrix())).sum();
}

double hs_norm(const Operator& a) { return a.matrix().norm(); }

double operator_norm(const Operator& a) {
  const Matrix& m = a.matrix();
  if (m.isZero(0.0)) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

Operator conjugate(const Operator& a, const Operator& u, double tol) {
  require_same_dim(a, u, "conjugate");
  if (!u.is_unitary(tol)) {
    throw InvalidArgument("conjugate: propagator is not unitary within tolerance");
  }
  return Operator(u.matrix().adjoint() * a.matrix() * u.matrix());
}

Operator SpectralDecomposition::reconstruct() const {
  Operator x = Operator::zero(projections.front().dim());
  for (std::size_t j = 0; j < size(); ++j) x = x + Complex(eigenvalues[j]) * projections[j];
  return x;
}

double SpectralDecomposition::max_residual(const Operator& x) const {
  const std::size_t d = x.dim();
  double r = hs_norm(reconstruct() - x);
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < size(); ++i) {
    const Matrix& p = projections[i].matrix();
    r = std::max(r, (p - p.adjoint()).norm());
    r = std::max(r, (p * p - p).norm());
    for (std::size_t j = i + 1; j < size(); ++j) r = std::max(r, (p * projections[j].matrix()).norm());
    sum += p;
  }
  r = std::max(r, (sum - Matrix::Identity(sum.rows(), sum.cols())).norm());
  return r;
}

SpectralDecomposition spectral_decompose(const Operator& x, double degeneracy_tol,
                                         double hermiticity_tol) {
  const double defect = x.hermiticity_defect();
  if (defect > hermiticity_tol * std::max(1.0, operator_norm(x))) {
    throw InvalidArgument("spectral_decompose: operator is not Hermitian; ||(X - X*)/2|| = " +
                          format_label(defect));
  }
  const Matrix h = 0.5 * (x.matrix() + x.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) {
    throw NumericalError("spectral_decompose: eigensolver did not converge");
  }
  const auto& vals = es.eigenvalues();  // ascending
  const Matrix& vecs = es.eigenvectors();

  SpectralDecomposition sd;
  Eigen::Index start = 0;
  const Eigen::Index n = vals.size();
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && vals(end) - vals(end - 1) <= degeneracy_tol) ++end;
    const Matrix block = vecs.middleCols(start, end - start);
    sd.eigenvalues.push_back(vals.segment(start, end - start).mean());
    sd.projections.emplace_back(block * block.adjoint());
    start = end;
  }
  return sd;
}

DensityState::DensityState(Operator p, double tol) : p_(std::move(p)) {
  const double defect = p_.hermiticity_defect();
  if (defect > tol) {
    throw InvalidArgument("DensityState: matrix is not Hermitian; ||(P - P*)/2|| = " +
                          format_label(defect));
  }
  const Complex tr = p_.trace();
  if (std::abs(tr - 1.0) > tol) {
    throw InvalidArgument("DensityState: trace is " + format_label(tr.real()) + ", expected 1");
  }
  const Matrix h = 0.5 * (p_.matrix() + p_.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -tol) {
    throw InvalidArgument("DensityState: negative eigenvalue " + format_label(es.eigenvalues()(0)));
  }
}

DensityState DensityState::pure(const Vector& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw InvalidArgument("DensityState::pure: zero vector");
  return DensityState(Operator::outer(psi / n, psi / n));
}

DensityState DensityState::maximally_mixed(std::size_t dim) {
  return DensityState(Complex(1.0 / double(dim)) * Operator::identity(dim));
}

DensityState DensityState::diagonal(std::initializer_list<double> weights) {
  return DensityState(Operator::diagonal(weights));
}

Complex DensityState::expectation(const Operator& a) const {
  if (a.dim() != dim()) throw InvalidArgument("DensityState::expectation: dimension mismatch");
  // Tr(P A) = sum_ij P_ij A_ji
  return (p_.matrix().transpose().cwiseProduct(a.matrix())).sum();
}

PartitionOfUnity::PartitionOfUnity(std::vector<std::string> labels,
                                   std::vector<Operator> projections, double tol)
    : labels_(std::move(labels)), projections_(std::move(projections)) {
  if (projections_.empty()) throw InvalidArgument("PartitionOfUnity: no projections");
  if (labels_.size() != projections_.size()) {
    throw InvalidArgument("PartitionOfUnity: " + std::to_string(labels_.size()) + " labels for " +
                          std::to_string(projections_.size()) + " projections");
  }
  if (std::set<std::string>(labels_.begin(), labels_.end()).size() != labels_.size()) {
    throw InvalidArgument("PartitionOfUnity: labels must be distinct");
  }
  const std::size_t d = projections_.front().dim();
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < projections_.size(); ++i) {
    const Operator& p = projections_[i];
    if (p.dim() != d) throw InvalidArgument("PartitionOfUnity: dimension mismatch");
    if (!p.is_projection(tol)) {
      throw InvalidArgument("PartitionOfUnity: element '" + labels_[i] + "' is not a projection");
    }
    for (std::size_t j = i + 1; j < projections_.size(); ++j) {
      if ((p.matrix() * projections_[j].matrix()).norm() > tol) {
        throw InvalidArgument("PartitionOfUnity: '" + labels_[i] + "' and '" + labels_[j] +
                              "' are not orthogonal");
      }
    }
    sum += p.matrix();
  }
  if ((sum - Matrix::Identity(sum.rows(), sum.cols())).norm() > tol * std::sqrt(double(d))) {
    throw InvalidArgument("PartitionOfUnity: projections do not sum to the identity");
  }
}

PartitionOfUnity PartitionOfUnity::from_spectral(const SpectralDecomposition& sd) {
  std::vector<std::string> labels;
  labels.reserve(sd.size());
  for (double v : sd.eigenvalues) {
    // Twelve significant digits so that e.g. -0.9999999999999998 reads "-1".
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v == 0.0 ? 0.0 : v,
                                   std::chars_format::general, 12);
    const std::string rounded(buf, res.ptr);
    labels.push_back(format_label(std::stod(rounded)));
  }
  return PartitionOfUnity(std::move(labels), sd.projections);
}

PartitionOfUnity PartitionOfUnity::computational(std::vector<std::string> labels) {
  std::vector<Operator> ps;
  for (std::size_t i = 0; i < labels.size(); ++i) ps.push_back(Operator::unit(labels.size(), i, i));
  return PartitionOfUnity(std::move(labels), std::move(ps));
}

std::optional<std::size_t> PartitionOfUnity::index_of(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

const Operator& PartitionOfUnity::projection(const std::string& label) const {
  const auto i = index_of(label);
  if (!i) throw InvalidArgument("PartitionOfUnity: unknown outcome label '" + label + "'");
  return projections_[*i];
}

PartitionOfUnity PartitionOfUnity::conjugated(const Operator& u, double tol) const {
  std::vector<Operator> ps;
  ps.reserve(projections_.size());
  for (const auto& p : projections_) ps.push_back(conjugate(p, u, tol));
  return PartitionOfUnity(labels_, std::move(ps), tol);
}

std::string format_label(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace ethsim
