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

#include "ethsim/state_analysis.hpp"

#include <algorithm>
#include <cmath>

#include "ethsim/error.hpp"

namespace ethsim {

namespace {

using Index = Eigen::Index;

CentralizerReport build_report(const FiniteAlgebra& ambient, const DensityState& phi,
                               double degeneracy_tol) {
  if (phi.dim() != ambient.dim()) {
    throw InvalidArgument("centralizer: state and ambient algebra have different dimensions");
  }
  if (!ambient.contains_identity()) {
    throw InvalidArgument("centralizer: ambient algebra must contain the identity");
  }
  Operator reduced = reduced_density(ambient, phi);
  SpectralDecomposition sd = spectral_decompose(reduced, degeneracy_tol);

  // Clustered density: eigenvalues within degeneracy_tol are identified, so
  // the centralizer is exactly the range of the pinching below.
  const Operator clustered = sd.reconstruct();
  const auto& basis = ambient.basis();
  const auto k = static_cast<Index>(basis.size());

  // g(i, j) = phi([B_j, B_i]) = Tr([P, B_j] B_i); K = sum_j a_j B_j is in the
  // centralizer iff g a = 0.
  Matrix g(k, k);
  for (Index j = 0; j < k; ++j) {
    const Matrix c = commutator(clustered, basis[static_cast<std::size_t>(j)]).matrix();
    for (Index i = 0; i < k; ++i) {
      g(i, j) = (c.transpose().cwiseProduct(basis[static_cast<std::size_t>(i)].matrix())).sum();
    }
  }
  Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = kRankCutoff * std::max(s.size() > 0 ? s(0) : 0.0, 1.0);
  Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  const Matrix null = svd.matrixV().rightCols(k - rank);

  std::vector<Operator> cbasis;
  cbasis.reserve(static_cast<std::size_t>(null.cols()));
  for (Index c = 0; c < null.cols(); ++c) cbasis.push_back(ambient.combine(null.col(c)));
  FiniteAlgebra cent = subalgebra_from_orthonormal(ambient, std::move(cbasis));
  FiniteAlgebra z = center(cent);
  std::vector<Operator> zp = minimal_projections(z);
  return CentralizerReport{std::move(cent), std::move(z), std::move(sd), std::move(reduced),
                           std::move(zp)};
}

}  // namespace

Operator reduced_density(const FiniteAlgebra& ambient, const DensityState& phi) {
  const Operator p = ambient.project(phi.matrix());
  return Complex(0.5) * (p + p.adjoint());
}

bool CenterExpectation::any_fallback() const {
  return std::any_of(fallback.begin(), fallback.end(), [](bool b) { return b; });
}

StateAnalysis::StateAnalysis(FiniteAlgebra ambient, DensityState phi, double degeneracy_tol)
    : ambient_(std::move(ambient)),
      phi_(std::move(phi)),
      report_(build_report(ambient_, phi_, degeneracy_tol)) {}

Complex StateAnalysis::evaluate(const Operator& x) const {
  const Matrix& p = report_.reduced_density.matrix();
  return (p.transpose().cwiseProduct(x.matrix())).sum();
}

void StateAnalysis::require_in_ambient(const Operator& a, const char* what) const {
  if (a.dim() != ambient_.dim()) throw InvalidArgument(std::string(what) + ": dimension mismatch");
  const double r = ambient_.residual(a);
  if (r > kDefaultTol * std::max(1.0, hs_norm(a))) {
    throw OutsideAlgebra(std::string(what) + ": operator is not in the ambient algebra", r);
  }
}

Operator StateAnalysis::expect_onto_centralizer(const Operator& a) const {
  require_in_ambient(a, "expect_onto_centralizer");
  const auto& pis = report_.state_spectral.projections;
  Matrix out = Matrix::Zero(a.matrix().rows(), a.matrix().cols());
  for (const auto& pi : pis) out += pi.matrix() * a.matrix() * pi.matrix();
  // The pinching stays inside the ambient algebra up to rounding; project to
  // remove that rounding.
  return ambient_.project(Operator(std::move(out)));
}

CenterExpectation StateAnalysis::expect_onto_center(const Operator& a) const {
  require_in_ambient(a, "expect_onto_center");
  const auto& zs = report_.center_projections;
  CenterExpectation result{Operator::zero(a.dim()), std::vector<bool>(zs.size(), false)};
  Matrix out = Matrix::Zero(a.matrix().rows(), a.matrix().cols());
  for (std::size_t j = 0; j < zs.size(); ++j) {
    const Matrix& z = zs[j].matrix();
    const Operator block(z * a.matrix() * z);
    const double weight = evaluate(zs[j]).real();
    Complex c;
    if (weight > kZeroWeight) {
      c = evaluate(block) / weight;
    } else {
      c = block.trace() / zs[j].trace().real();
      result.fallback[j] = true;
    }
    out += c * z;
  }
  result.value = Operator(std::move(out));
  return result;
}

CentralizerReport centralizer(const FiniteAlgebra& ambient, const DensityState& phi,
                              double degeneracy_tol) {
  return build_report(ambient, phi, degeneracy_tol);
}

Operator expect_onto_centralizer(const FiniteAlgebra& ambient, const DensityState& phi,
                                 const Operator& a) {
  return StateAnalysis(ambient, phi).expect_onto_centralizer(a);
}

CenterExpectation expect_onto_center(const FiniteAlgebra& ambient, const DensityState& phi,
                                     const Operator& a) {
  return StateAnalysis(ambient, phi).expect_onto_center(a);
}

IncoherenceDefect incoherence_defect(const StateAnalysis& analysis,
                                     const PartitionOfUnity& partition, const Operator& a,
                                     DefectRoute route) {
  analysis.require_in_ambient(a, "incoherence_defect");
  for (const auto& p : partition.projections()) {
    analysis.require_in_ambient(p, "incoherence_defect (partition)");
  }
  Complex incoherent = 0.0;
  double delta = 0.0;
  for (const auto& p : partition.projections()) {
    incoherent += analysis.evaluate(p * a * p);
    const Operator e = route == DefectRoute::kCenter ? analysis.expect_onto_center(p).value
                                                     : analysis.expect_onto_centralizer(p);
    delta = std::max(delta, operator_norm(e - p));
  }
  IncoherenceDefect out{};
  out.lhs = std::abs(analysis.evaluate(a) - incoherent);
  out.outcomes = partition.size();
  out.norm_a = operator_norm(a);
  out.delta_prime = delta;
  out.bound = 4.0 * double(out.outcomes) * delta * out.norm_a;
  out.holds = out.lhs <= out.bound + 1e-12 * std::max(1.0, out.norm_a);
  return out;
}

IncoherenceDefect incoherence_defect(const FiniteAlgebra& ambient, const DensityState& phi,
                                     const PartitionOfUnity& partition, const Operator& a,
                                     DefectRoute route) {
  return incoherence_defect(StateAnalysis(ambient, phi), partition, a, route);
}

}  // namespace ethsim
