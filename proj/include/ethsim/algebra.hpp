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

// Finite-dimensional *-algebras represented by a Hilbert-Schmidt orthonormal
// basis of their linear span inside M_d.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ethsim/operator.hpp"

namespace ethsim {

/// Singular values below kRankCutoff * max(largest singular value, 1) count
/// as zero in nullspace and intersection computations.
inline constexpr double kRankCutoff = 1e-10;
/// Default tolerance for deciding that two spans coincide.
inline constexpr double kSpanTol = 1e-8;

class FiniteAlgebra {
 public:
  /// Orthonormalizes `spanning` and checks that the span is *-closed and
  /// multiplicatively closed within `tol`.  Throws InvalidArgument otherwise.
  static FiniteAlgebra from_span(std::size_t dim, std::span<const Operator> spanning,
                                 double tol = kSpanTol);
  /// M_d with the matrix-unit basis e_ij.
  static FiniteAlgebra full(std::size_t dim);
  /// C * identity.
  static FiniteAlgebra scalars(std::size_t dim);

  /// Ambient matrix dimension d.
  std::size_t dim() const noexcept { return dim_; }
  /// Dimension of the span.
  std::size_t size() const noexcept { return basis_.size(); }
  const std::vector<Operator>& basis() const noexcept { return basis_; }
  bool contains_identity() const noexcept { return contains_identity_; }

  /// Hilbert-Schmidt orthogonal projection onto the span.
  Operator project(const Operator& x) const;
  /// HS distance from `x` to the span.
  double residual(const Operator& x) const;
  /// Coefficients <B_i, x> in the orthonormal basis.
  Vector coefficients(const Operator& x) const;
  Operator combine(const Vector& coeffs) const;

  bool is_abelian(double tol = kDefaultTol) const;
  /// Largest HS residual of B_i* and B_i B_j outside the span.
  double closure_defect() const;

  /// d^2 x size matrix whose columns are the vectorized basis elements.
  const Matrix& stacked() const noexcept { return q_; }

 private:
  FiniteAlgebra(std::size_t dim, std::vector<Operator> orthonormal_basis);

  friend FiniteAlgebra generate_algebra(std::span<const Operator> generators);
  friend FiniteAlgebra commutant(const FiniteAlgebra& a);
  friend FiniteAlgebra intersection(const FiniteAlgebra& a, const FiniteAlgebra& b);
  friend FiniteAlgebra subalgebra_from_orthonormal(const FiniteAlgebra& ambient,
                                                   std::vector<Operator> basis);

  std::size_t dim_;
  std::vector<Operator> basis_;
  Matrix q_;
  bool contains_identity_ = false;
};

struct Membership {
  bool member;
  double residual;
};

/// Smallest unital *-algebra containing `generators`.  Throws InvalidArgument
/// on an empty list or mixed dimensions.
FiniteAlgebra generate_algebra(std::span<const Operator> generators);
inline FiniteAlgebra generate_algebra(std::initializer_list<Operator> generators) {
  return generate_algebra(std::span<const Operator>(generators.begin(), generators.size()));
}

/// Membership with HS-distance residual.
Membership contains(const FiniteAlgebra& a, const Operator& x, double tol = kDefaultTol);

/// All X in M_d with [B, X] = 0 for every B in `a`.
FiniteAlgebra commutant(const FiniteAlgebra& a);

/// span(a) ∩ span(b), via principal angles.  Requires equal ambient dimension.
FiniteAlgebra intersection(const FiniteAlgebra& a, const FiniteAlgebra& b);

/// a ∩ commutant(a).
FiniteAlgebra center(const FiniteAlgebra& a);

/// max over basis elements of the residual of each span in the other.
double span_distance(const FiniteAlgebra& a, const FiniteAlgebra& b);
bool span_equal(const FiniteAlgebra& a, const FiniteAlgebra& b, double tol = kSpanTol);

/// True iff `m` is abelian and commutant(m) ∩ ambient = m.  Throws
/// InvalidArgument if `m` is not contained in `ambient`.
bool is_maximal_abelian(const FiniteAlgebra& m, const FiniteAlgebra& ambient,
                        double tol = kSpanTol);

/// Minimal projections of an abelian algebra; they sum to the identity when
/// the algebra is unital.  Throws InvalidArgument if `z` is not abelian.
std::vector<Operator> minimal_projections(const FiniteAlgebra& z);

/// Wraps an orthonormal family already known to span a *-subalgebra.
FiniteAlgebra subalgebra_from_orthonormal(const FiniteAlgebra& ambient,
                                          std::vector<Operator> basis);

}  // namespace ethsim
