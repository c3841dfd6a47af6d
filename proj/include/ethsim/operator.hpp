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

// Dense complex operators on a finite-dimensional Hilbert space, their
// spectral decomposition, density matrices and partitions of unity.
//
// Everything here is a value type: once constructed an object is never
// mutated, so all of it can be shared freely between threads.

#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ethsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Default tolerance for invariant checks (Hermiticity, idempotence, trace).
inline constexpr double kDefaultTol = 1e-9;
/// Eigenvalues closer than this are treated as one degenerate eigenvalue.
inline constexpr double kDegeneracyTol = 1e-8;

class Operator {
 public:
  /// The 1x1 zero operator; exists so that Operator is regular.
  Operator() : m_(Matrix::Zero(1, 1)) {}
  explicit Operator(Matrix m);

  static Operator identity(std::size_t dim);
  static Operator zero(std::size_t dim);
  static Operator diagonal(std::span<const Complex> entries);
  static Operator diagonal(std::initializer_list<double> entries);
  /// Row-major literal, e.g. `Operator::from_rows({{0, 1}, {1, 0}})`.
  static Operator from_rows(std::initializer_list<std::initializer_list<Complex>> rows);
  /// |a><b|
  static Operator outer(const Vector& a, const Vector& b);
  /// e_ij, the matrix unit with a single one at (row, col).
  static Operator unit(std::size_t dim, std::size_t row, std::size_t col);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }

  Operator adjoint() const { return Operator(m_.adjoint()); }
  Complex trace() const { return m_.trace(); }

  /// Operator norm of the anti-Hermitian part (A - A*)/2.
  double hermiticity_defect() const;
  bool is_hermitian(double tol = kDefaultTol) const;
  bool is_projection(double tol = kDefaultTol) const;
  bool is_unitary(double tol = kDefaultTol) const;

  friend Operator operator+(const Operator& a, const Operator& b);
  friend Operator operator-(const Operator& a, const Operator& b);
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(Complex s, const Operator& a);
  friend Operator operator*(const Operator& a, Complex s) { return s * a; }

 private:
  Matrix m_;
};

/// Tr(A* B).
Complex hs_inner(const Operator& a, const Operator& b);
/// Frobenius norm.
double hs_norm(const Operator& a);
/// Largest singular value.
double operator_norm(const Operator& a);
/// [A, B] = AB - BA
Operator commutator(const Operator& a, const Operator& b);
/// Returns U* A U.  Throws InvalidArgument if U is not unitary within `tol`.
Operator conjugate(const Operator& a, const Operator& u, double tol = kDefaultTol);

/// X = sum_j eigenvalues[j] * projections[j] with strictly increasing
/// eigenvalues and mutually orthogonal projections summing to the identity.
struct SpectralDecomposition {
  std::vector<double> eigenvalues;
  std::vector<Operator> projections;

  std::size_t size() const noexcept { return eigenvalues.size(); }
  Operator reconstruct() const;

  /// Largest violation among reconstruction against `x`, idempotence,
  /// pairwise orthogonality and completeness.
  double max_residual(const Operator& x) const;
};

/// Spectral decomposition of a Hermitian operator.  Eigenvalues that chain
/// together within `degeneracy_tol` are merged into one cluster whose value is
/// the cluster mean.  Throws InvalidArgument when `x` is not Hermitian within
/// `hermiticity_tol` (relative to max(1, ||x||)).
SpectralDecomposition spectral_decompose(const Operator& x,
                                         double degeneracy_tol = kDegeneracyTol,
                                         double hermiticity_tol = kDefaultTol);

namespace detail {
/// Passkey for building a DensityState whose validity follows algebraically
/// from a valid input (collapse, incoherent sums); skips the eigenvalue check.
struct TrustedState {
  explicit TrustedState() = default;
};
}  // namespace detail

/// A positive semidefinite, unit-trace operator P; the state A -> Tr(P A).
class DensityState {
 public:
  DensityState(Operator p, detail::TrustedState) : p_(std::move(p)) {}

  /// Validates Hermiticity, positivity (eigenvalues >= -tol) and unit trace.
  explicit DensityState(Operator p, double tol = kDefaultTol);

  static DensityState pure(const Vector& psi);
  static DensityState maximally_mixed(std::size_t dim);
  static DensityState diagonal(std::initializer_list<double> weights);

  std::size_t dim() const noexcept { return p_.dim(); }
  const Operator& matrix() const noexcept { return p_; }

  /// rho(A) = Tr(P A)
  Complex expectation(const Operator& a) const;

 private:
  Operator p_;
};

/// Mutually orthogonal projections summing to the identity, each tagged with
/// a distinct outcome label.
class PartitionOfUnity {
 public:
  PartitionOfUnity(std::vector<std::string> labels, std::vector<Operator> projections,
                   double tol = kDefaultTol);

  /// Labels are the eigenvalues rounded to 12 significant digits.
  static PartitionOfUnity from_spectral(const SpectralDecomposition& sd);
  /// The standard-basis partition {e_11, ..., e_dd}.
  static PartitionOfUnity computational(std::vector<std::string> labels);

  std::size_t size() const noexcept { return projections_.size(); }
  std::size_t dim() const noexcept { return projections_.front().dim(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<Operator>& projections() const noexcept { return projections_; }

  std::optional<std::size_t> index_of(const std::string& label) const;
  /// Throws InvalidArgument for an unknown label.
  const Operator& projection(const std::string& label) const;

  /// Every projection replaced by U* Pi U.
  PartitionOfUnity conjugated(const Operator& u, double tol = kDefaultTol) const;

 private:
  std::vector<std::string> labels_;
  std::vector<Operator> projections_;
};

/// Shortest round-trip decimal rendering of a real number; used for
/// eigenvalue labels and for all numeric text output.
std::string format_label(double value);

}  // namespace ethsim
