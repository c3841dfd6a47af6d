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

// Repeated indirect measurement of a static property nu in {0, ..., N}.
// Each emitted particle produces a click xi = +1 or -1 with probability
// p(xi | nu), independently; nu itself is distributed as pi(nu).  The
// measure on click sequences is the exchangeable mixture
//
//   mu(xi_1, ..., xi_n) = sum_nu pi(nu) prod_i p(xi_i | nu).
//
// Relative entropies are in bits throughout; exponents of large-deviation
// estimates are in nats per click.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ethsim/event_engine.hpp"
#include "ethsim/operator.hpp"

namespace ethsim {

using Clicks = std::vector<std::int8_t>;

class DeFinettiModel {
 public:
  /// weights[nu] = pi(nu), p_plus[nu] = p(+1 | nu), tau = emission period.
  /// Throws InvalidArgument unless the weights form a probability vector
  /// (sum within 1e-12), every p_plus lies in [0, 1] and tau > 0.
  DeFinettiModel(std::vector<double> weights, std::vector<double> p_plus, double tau = 1.0);

  /// Number of values of nu (N + 1).
  std::size_t size() const noexcept { return weights_.size(); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& p_plus() const noexcept { return p_plus_; }
  double tau() const noexcept { return tau_; }

  /// p(xi | nu) for xi = +1 or -1.
  double conditional(std::int8_t xi, std::size_t nu) const;
  /// min over nu1 != nu2 of |p(+1|nu1) - p(+1|nu2)|; 0 when size() == 1.
  double kappa() const;

 private:
  std::vector<double> weights_;
  std::vector<double> p_plus_;
  double tau_;
};

/// eps_n = prefactor * n^(-exponent), exponent in (0, 1/2).
struct BandSchedule {
  double exponent = 1.0 / 3.0;
  double prefactor = 1.0;

  /// Throws InvalidArgument unless eps_n lies in (0, 1).
  double epsilon(std::size_t n) const;
};

struct ClassificationBand {
  std::size_t n = 0;
  double epsilon = 0.0;
};

struct SampledProtocol {
  std::size_t nu = 0;
  Clicks clicks;
};

/// Protocol i draws nu from pi and then n clicks from p(.|nu) using stream i
/// of the seed.
std::vector<SampledProtocol> sample_protocols(const DeFinettiModel& model, std::size_t n,
                                              std::size_t count, std::uint64_t seed);
SampledProtocol sample_protocol(const DeFinettiModel& model, std::size_t n, std::uint64_t seed,
                                std::uint64_t stream);

double exact_protocol_probability(const DeFinettiModel& model, std::span<const std::int8_t> clicks);
/// Natural log of the same; -inf for an impossible protocol.
double log_protocol_probability(const DeFinettiModel& model, std::span<const std::int8_t> clicks);

/// Fraction of clicks equal to xi.  Throws InvalidArgument on an empty protocol.
double frequency(std::span<const std::int8_t> clicks, std::int8_t xi);

struct Classification {
  /// The unique nu whose band contains the +1 frequency.
  std::optional<std::size_t> nu;
  /// Number of bands containing the frequency (more than one is possible
  /// only when eps >= kappa / 2).
  std::size_t matches = 0;
  /// eps >= kappa / 2, so bands may overlap.
  bool overlap_possible = false;
};

/// |f_+1 - p(+1|nu)| < eps selects nu.
Classification classify(std::span<const std::int8_t> clicks, const DeFinettiModel& model,
                        const ClassificationBand& band);

/// log P(k successes in n trials with success probability p).
double log_binomial_pmf(std::size_t n, std::size_t k, double p);

/// P(|K/n - p(+1|nu_band)| < eps) for K ~ Binomial(n, p(+1|nu_true)),
/// summed exactly in log space.
double band_mass(const DeFinettiModel& model, std::size_t nu_band, std::size_t nu_true,
                 std::size_t n, double eps);

struct BornRuleRow {
  std::size_t nu = 0;
  double weight = 0.0;
  /// Fraction of sampled protocols classified as nu (0 when count == 0).
  double empirical = 0.0;
  /// Exact mixture mass of the band of nu.
  double exact = 0.0;
};

struct BornRuleResult {
  std::size_t n = 0;
  std::size_t count = 0;
  double epsilon = 0.0;
  std::vector<BornRuleRow> rows;
  /// Classified fraction of the samples.
  double coverage = 0.0;
  double exact_coverage = 0.0;
};

BornRuleResult born_rule_experiment(const DeFinettiModel& model, const BandSchedule& schedule,
                                    std::size_t n, std::size_t count, std::uint64_t seed);

struct Posterior {
  std::vector<double> weights;
  double entropy_bits = 0.0;
};

/// Bayes posterior over nu.  Throws ZeroProbabilityBranch for a protocol of
/// probability zero.
Posterior posterior(const DeFinettiModel& model, std::span<const std::int8_t> clicks);

/// Shannon entropy in bits.
double entropy_bits(std::span<const double> weights);

/// sigma(nu1 || nu2) in bits; +infinity when p(.|nu1) is not absolutely
/// continuous with respect to p(.|nu2).
double relative_entropy(const DeFinettiModel& model, std::size_t nu1, std::size_t nu2);

/// Bernoulli relative entropy KL(q || p) in nats.
double bernoulli_kl_nats(double q, double p);

struct SanovRow {
  std::size_t n = 0;
  double epsilon = 0.0;
  /// mu(Xi_nu1(n) | nu2), exact.
  double band_mass = 0.0;
  /// -ln(band_mass) / n
  double empirical_exponent = 0.0;
  /// inf over the band of KL(q || p(+1|nu2)), nats.
  double band_kl_exponent = 0.0;
  /// C * exp(-n * sigma * ln 2)
  double bound = 0.0;
};

struct SanovReport {
  std::size_t nu1 = 0;
  std::size_t nu2 = 0;
  /// sigma(nu1 || nu2) * ln 2, nats.
  double reference_exponent = 0.0;
  /// Smallest C with band_mass <= C exp(-n sigma ln 2) on every row.
  double prefactor = 0.0;
  bool holds = false;
  std::vector<SanovRow> rows;
};

/// Throws InvalidArgument if eps_n >= kappa / 2 for some n.
SanovReport sanov_check(const DeFinettiModel& model, std::size_t nu1, std::size_t nu2,
                        const BandSchedule& schedule, std::span<const std::size_t> n_values);

struct DivergencePair {
  std::size_t nu1 = 0;
  std::size_t nu2 = 0;
  double sigma_bits = 0.0;
};

struct DetectionTime {
  double sigma_min_bits = 0.0;
  /// tau / sigma_min
  double time = 0.0;
  std::vector<DivergencePair> pairs;
  /// Smallest n >= 1 whose largest cross-band mass is at most 1/e, with
  /// bands eps_n from the calibration schedule; empty if none up to n_max.
  std::optional<std::size_t> n_star;
  /// n_star * sigma_min * ln 2
  double calibration = 0.0;
};

/// Calibration bands default to eps_n = n^(-0.45).  Throws InvalidArgument
/// when two values of nu have identical conditionals.
DetectionTime detection_time(const DeFinettiModel& model,
                             const BandSchedule& calibration = BandSchedule{0.45, 1.0},
                             std::size_t n_max = 100000);

/// Labels of the two click outcomes in frame realizations.
inline constexpr const char* kClickPlus = "1";
inline constexpr const char* kClickMinus = "-1";

struct CommutingRealization {
  HeisenbergFrame frame;
  DensityState state;
};

/// A frame on C^(N+1) (x) (C^2)^(x n) whose history measure over its n
/// observable steps equals the mixture measure: the nu register is
/// diagonal with weights pi(nu), step k rotates probe k by an amount
/// controlled by nu, and the candidate partition at t_k reads probe k.
CommutingRealization commuting_realization(const DeFinettiModel& model, std::size_t n);

}  // namespace ethsim
