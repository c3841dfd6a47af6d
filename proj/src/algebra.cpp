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

#include "ethsim/algebra.hpp"

#include <algorithm>
#include <cmath>

#include "ethsim/error.hpp"
#include "ethsim/rng.hpp"

namespace ethsim {

namespace {

using Index = Eigen::Index;

Vector vec(const Operator& x) {
  return Eigen::Map<const Vector>(x.matrix().data(), x.matrix().size());
}

Operator unvec(const Vector& v, std::size_t dim) {
  const auto d = static_cast<Index>(dim);
  return Operator(Eigen::Map<const Matrix>(v.data(), d, d));
}

// Incremental Gram-Schmidt with one re-orthogonalization pass.  A candidate
// whose residual is below kRankCutoff relative to its own norm is dropped.
class SpanBuilder {
 public:
  explicit SpanBuilder(std::size_t dim) : dim_(dim) {}

  bool add(const Operator& x) {
    Vector v = vec(x);
    const double n0 = v.norm();
    if (n0 == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : cols_) v -= q * q.dot(v);
    }
    const double n1 = v.norm();
    if (n1 <= kRankCutoff * n0) return false;
    cols_.push_back(v / n1);
    return true;
  }

  std::size_t size() const { return cols_.size(); }

  std::vector<Operator> basis() const {
    std::vector<Operator> out;
    out.reserve(cols_.size());
    for (const auto& c : cols_) out.push_back(unvec(c, dim_));
    return out;
  }

  Operator element(std::size_t i) const { return unvec(cols_[i], dim_); }

 private:
  std::size_t dim_;
  std::vector<Vector> cols_;
};

// Right singular vectors of `m` belonging to (numerically) zero singular
// values, as columns.
Matrix nullspace(const Matrix& m) {
  const Index n = m.cols();
  if (n == 0) return Matrix(0, 0);
  if (m.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = kRankCutoff * std::max(s.size() > 0 ? s(0) : 0.0, 1.0);
  Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

void require_dims(const FiniteAlgebra& a, const FiniteAlgebra& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw InvalidArgument(std::string(what) + ": ambient dimension mismatch");
  }
}

}  // namespace

FiniteAlgebra::FiniteAlgebra(std::size_t dim, std::vector<Operator> orthonormal_basis)
    : dim_(dim), basis_(std::move(orthonormal_basis)) {
  const auto d2 = static_cast<Index>(dim * dim);
  q_.resize(d2, static_cast<Index>(basis_.size()));
  for (std::size_t i = 0; i < basis_.size(); ++i) q_.col(static_cast<Index>(i)) = vec(basis_[i]);
  contains_identity_ = !basis_.empty() && residual(Operator::identity(dim)) <= kDefaultTol;
}

FiniteAlgebra FiniteAlgebra::from_span(std::size_t dim, std::span<const Operator> spanning,
                                       double tol) {
  SpanBuilder sb(dim);
  for (const auto& x : spanning) {
    if (x.dim() != dim) throw InvalidArgument("FiniteAlgebra::from_span: dimension mismatch");
    sb.add(x);
  }
  if (sb.size() == 0) throw InvalidArgument("FiniteAlgebra::from_span: empty span");
  FiniteAlgebra a(dim, sb.basis());
  const double defect = a.closure_defect();
  if (defect > tol) {
    throw InvalidArgument("FiniteAlgebra::from_span: span is not a *-algebra (closure residual " +
                          format_label(defect) + ")");
  }
  return a;
}

FiniteAlgebra FiniteAlgebra::full(std::size_t dim) {
  std::vector<Operator> basis;
  basis.reserve(dim * dim);
  // Column-major order so that basis i corresponds to vec index i.
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t r = 0; r < dim; ++r) basis.push_back(Operator::unit(dim, r, c));
  }
  return FiniteAlgebra(dim, std::move(basis));
}

FiniteAlgebra FiniteAlgebra::scalars(std::size_t dim) {
  return FiniteAlgebra(dim, {Complex(1.0 / std::sqrt(double(dim))) * Operator::identity(dim)});
}

Vector FiniteAlgebra::coefficients(const Operator& x) const {
  if (x.dim() != dim_) throw InvalidArgument("FiniteAlgebra: dimension mismatch");
  return q_.adjoint() * vec(x);
}

Operator FiniteAlgebra::combine(const Vector& coeffs) const {
  return unvec(q_ * coeffs, dim_);
}

Operator FiniteAlgebra::project(const Operator& x) const { return combine(coefficients(x)); }

double FiniteAlgebra::residual(const Operator& x) const {
  if (x.dim() != dim_) throw InvalidArgument("FiniteAlgebra: dimension mismatch");
  const Vector v = vec(x);
  return (v - q_ * (q_.adjoint() * v)).norm();
}

bool FiniteAlgebra::is_abelian(double tol) const {
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    for (std::size_t j = i + 1; j < basis_.size(); ++j) {
      if (hs_norm(commutator(basis_[i], basis_[j])) > tol) return false;
    }
  }
  return true;
}

double FiniteAlgebra::closure_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    worst = std::max(worst, residual(basis_[i].adjoint()));
    for (std::size_t j = 0; j < basis_.size(); ++j) {
      worst = std::max(worst, residual(basis_[i] * basis_[j]));
    }
  }
  return worst;
}

FiniteAlgebra generate_algebra(std::span<const Operator> generators) {
  if (generators.empty()) throw InvalidArgument("generate_algebra: no generators");
  const std::size_t d = generators.front().dim();
  SpanBuilder sb(d);
  sb.add(Operator::identity(d));
  for (const auto& g : generators) {
    if (g.dim() != d) throw InvalidArgument("generate_algebra: generators have mixed dimensions");
    sb.add(g);
    sb.add(g.adjoint());
  }

  // Every pair with at least one element added in the previous round gets
  // multiplied; the span grows monotonically and is bounded by d^2.
  std::size_t fresh_from = 0;
  const std::size_t max_rounds = d * d;
  for (std::size_t round = 0;; ++round) {
    if (round > max_rounds) {
      throw NumericalError("generate_algebra: closure did not stabilize within d^2 rounds");
    }
    const std::size_t before = sb.size();
    const auto basis = sb.basis();
    for (std::size_t i = 0; i < before; ++i) {
      for (std::size_t j = (i >= fresh_from ? 0 : fresh_from); j < before; ++j) {
        sb.add(basis[i] * basis[j]);
        sb.add(basis[j] * basis[i]);
      }
      if (i >= fresh_from) sb.add(basis[i].adjoint());
    }
    if (sb.size() == before) break;
    fresh_from = before;
  }
  return FiniteAlgebra(d, sb.basis());
}

Membership contains(const FiniteAlgebra& a, const Operator& x, double tol) {
  const double r = a.residual(x);
  return {r <= tol, r};
}

FiniteAlgebra commutant(const FiniteAlgebra& a) {
  const auto d = static_cast<Index>(a.dim());
  const Index d2 = d * d;
  const Matrix id = Matrix::Identity(d, d);

  // vec(BX - XB) = (I (x) B - B^T (x) I) vec(X), column-major vec.
  const auto commutator_map = [&](const Matrix& b) {
    Matrix l = Matrix::Zero(d2, d2);
    for (Index p = 0; p < d; ++p) {
      l.block(p * d, p * d, d, d) += b;
      for (Index q = 0; q < d; ++q) l.block(p * d, q * d, d, d) -= b(q, p) * id;
    }
    return l;
  };

  // The commutant of a generating set is the commutant of the algebra.  Start
  // from two generic elements and add basis elements that fail to commute with
  // the candidate until none do; this keeps the stacked map small.
  std::vector<Matrix> selection;
  CounterRng rng(0xA4093822299F31D0ULL, a.size());
  for (int g = 0; g < 2; ++g) {
    Vector c(static_cast<Index>(a.size()));
    for (Index i = 0; i < c.size(); ++i) c(i) = Complex(2 * rng.uniform() - 1, 2 * rng.uniform() - 1);
    selection.push_back(a.combine(c).matrix());
  }
  for (std::size_t round = 0; round <= a.size(); ++round) {
    Matrix stacked(d2 * static_cast<Index>(selection.size()), d2);
    for (std::size_t i = 0; i < selection.size(); ++i) {
      stacked.middleRows(static_cast<Index>(i) * d2, d2) = commutator_map(selection[i]);
    }
    const Matrix null = nullspace(stacked);
    std::vector<Operator> basis;
    basis.reserve(static_cast<std::size_t>(null.cols()));
    for (Index c = 0; c < null.cols(); ++c) basis.push_back(unvec(null.col(c), a.dim()));

    double worst = 0.0;
    std::size_t worst_index = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (const auto& x : basis) {
        const double r = hs_norm(commutator(a.basis()[i], x));
        if (r > worst) {
          worst = r;
          worst_index = i;
        }
      }
    }
    if (worst <= kDefaultTol) return FiniteAlgebra(a.dim(), std::move(basis));
    selection.push_back(a.basis()[worst_index].matrix());
  }
  throw NumericalError("commutant: candidate commutant failed to stabilize");
}

FiniteAlgebra intersection(const FiniteAlgebra& a, const FiniteAlgebra& b) {
  require_dims(a, b, "intersection");
  const Matrix& qa = a.stacked();
  const Matrix& qb = b.stacked();
  // Columns of qa with their component in span(b) removed; the singular
  // values are the sines of the principal angles, so the nullspace picks out
  // exactly the directions shared by both spans.
  const Matrix outside = qa - qb * (qb.adjoint() * qa);
  Matrix null;
  if (outside.cols() == 0) {
    null = Matrix(0, 0);
  } else {
    Eigen::JacobiSVD<Matrix> svd(outside, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    Index rank = 0;
    while (rank < s.size() && s(rank) > kRankCutoff) ++rank;
    null = svd.matrixV().rightCols(outside.cols() - rank);
  }
  std::vector<Operator> basis;
  const Matrix shared = qa * null;
  for (Index c = 0; c < shared.cols(); ++c) basis.push_back(unvec(shared.col(c), a.dim()));
  return FiniteAlgebra(a.dim(), std::move(basis));
}

FiniteAlgebra center(const FiniteAlgebra& a) { return intersection(a, commutant(a)); }

double span_distance(const FiniteAlgebra& a, const FiniteAlgebra& b) {
  require_dims(a, b, "span_distance");
  double worst = 0.0;
  for (const auto& x : a.basis()) worst = std::max(worst, b.residual(x));
  for (const auto& x : b.basis()) worst = std::max(worst, a.residual(x));
  return worst;
}

bool span_equal(const FiniteAlgebra& a, const FiniteAlgebra& b, double tol) {
  return a.dim() == b.dim() && a.size() == b.size() && span_distance(a, b) <= tol;
}

bool is_maximal_abelian(const FiniteAlgebra& m, const FiniteAlgebra& ambient, double tol) {
  require_dims(m, ambient, "is_maximal_abelian");
  for (const auto& x : m.basis()) {
    const double r = ambient.residual(x);
    if (r > tol) throw OutsideAlgebra("is_maximal_abelian: subalgebra not contained in ambient", r);
  }
  if (!m.is_abelian(tol)) return false;
  return span_equal(intersection(commutant(m), ambient), m, tol);
}

std::vector<Operator> minimal_projections(const FiniteAlgebra& z) {
  if (!z.is_abelian(1e-8)) throw InvalidArgument("minimal_projections: algebra is not abelian");
  std::vector<Operator> hermitian;
  for (const auto& b : z.basis()) {
    hermitian.push_back(Complex(0.5) * (b + b.adjoint()));
    hermitian.push_back(Complex(0.0, -0.5) * (b - b.adjoint()));
  }
  // A generic real combination of a Hermitian spanning set has one distinct
  // eigenvalue per minimal projection.  The draw is deterministic.
  for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
    CounterRng rng(0x3C6EF372FE94F82BULL, attempt);
    Operator generic = Operator::zero(z.dim());
    for (const auto& h : hermitian) generic = generic + Complex(2.0 * rng.uniform() - 1.0) * h;
    const auto sd = spectral_decompose(generic, 1e-7);
    if (sd.size() != z.size()) continue;
    bool inside = true;
    for (const auto& p : sd.projections) inside = inside && z.residual(p) <= 1e-7;
    if (inside) return sd.projections;
  }
  throw NumericalError("minimal_projections: could not separate the minimal projections");
}

FiniteAlgebra subalgebra_from_orthonormal(const FiniteAlgebra& ambient,
                                          std::vector<Operator> basis) {
  return FiniteAlgebra(ambient.dim(), std::move(basis));
}

}  // namespace ethsim
