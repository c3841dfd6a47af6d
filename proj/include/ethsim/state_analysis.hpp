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

// Centralizer C_phi = {K in M : phi([K, B]) = 0 for all B in M} of a state
// restricted to an ambient algebra M, its center Z_phi, and the conditional
// expectations of M onto both.
//
// The state restricted to M is represented by its reduced density matrix
// P_M, the Hilbert-Schmidt projection of P onto M; Tr(P_M X) = Tr(P X) for
// every X in M and P_M lies in M.  C_phi is then the relative commutant of
// the spectral projections of P_M, and the conditional expectation onto it is
// the pinching A -> sum_j pi_j A pi_j.

#pragma once

#include <cstddef>
#include <vector>

#include "ethsim/algebra.hpp"
#include "ethsim/operator.hpp"

namespace ethsim {

/// Below this weight a central block is treated as invisible to the state and
/// e_phi falls back to the normalized trace on it.
inline constexpr double kZeroWeight = 1e-12;

struct CentralizerReport {
  FiniteAlgebra centralizer;
  FiniteAlgebra center;
  /// Spectral data of the reduced density matrix P_M (clustered).
  SpectralDecomposition state_spectral;
  Operator reduced_density;
  /// Minimal projections z_j of the center; they sum to the identity.
  std::vector<Operator> center_projections;
};

/// HS projection of the density matrix onto `ambient`, Hermitized.
Operator reduced_density(const FiniteAlgebra& ambient, const DensityState& phi);

struct CenterExpectation {
  Operator value;
  /// fallback[j] is true when phi(z_j) <= kZeroWeight and block j used the trace.
  std::vector<bool> fallback;
  bool any_fallback() const;
};

/// Precomputed centralizer/center data for one (ambient, state) pair; apply
/// the two conditional expectations as often as needed.
class StateAnalysis {
 public:
  StateAnalysis(FiniteAlgebra ambient, DensityState phi, double degeneracy_tol = kDegeneracyTol);

  const FiniteAlgebra& ambient() const noexcept { return ambient_; }
  const DensityState& state() const noexcept { return phi_; }
  const CentralizerReport& report() const noexcept { return report_; }

  /// phi(X) for X in the ambient algebra.
  Complex evaluate(const Operator& x) const;

  /// E_phi(A) = sum_j pi_j A pi_j.  Throws OutsideAlgebra if A is not in the
  /// ambient algebra.
  Operator expect_onto_centralizer(const Operator& a) const;
  /// e_phi(A) = sum_j c_j z_j with c_j = phi(z_j A z_j) / phi(z_j).
  CenterExpectation expect_onto_center(const Operator& a) const;

  /// Throws OutsideAlgebra unless `a` lies in the ambient algebra (HS residual
  /// at most kDefaultTol * max(1, ||a||_HS)).
  void require_in_ambient(const Operator& a, const char* what) const;

 private:
  FiniteAlgebra ambient_;
  DensityState phi_;
  CentralizerReport report_;
};

/// Centralizer, center and state spectrum of `phi` restricted to `ambient`.
CentralizerReport centralizer(const FiniteAlgebra& ambient, const DensityState& phi,
                              double degeneracy_tol = kDegeneracyTol);

Operator expect_onto_centralizer(const FiniteAlgebra& ambient, const DensityState& phi,
                                 const Operator& a);

CenterExpectation expect_onto_center(const FiniteAlgebra& ambient, const DensityState& phi,
                                     const Operator& a);

enum class DefectRoute { kCentralizer, kCenter };

struct IncoherenceDefect {
  /// |phi(A) - sum_j phi(Pi_j A Pi_j)|
  double lhs;
  /// 4 N delta' ||A||
  double bound;
  /// max_j ||E(Pi_j) - Pi_j|| for the chosen conditional expectation.
  double delta_prime;
  std::size_t outcomes;
  double norm_a;
  /// lhs <= bound up to a rounding slack of 1e-12 * max(1, ||A||).
  bool holds;
};

/// Four-group estimate relating how far a partition sits from the
/// centralizer (or its center) to the coherence visible in `a`.  Both the
/// projections and `a` must lie in `ambient`.
IncoherenceDefect incoherence_defect(const FiniteAlgebra& ambient, const DensityState& phi,
                                     const PartitionOfUnity& partition, const Operator& a,
                                     DefectRoute route = DefectRoute::kCenter);
IncoherenceDefect incoherence_defect(const StateAnalysis& analysis,
                                     const PartitionOfUnity& partition, const Operator& a,
                                     DefectRoute route = DefectRoute::kCenter);

}  // namespace ethsim
