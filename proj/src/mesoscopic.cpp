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

#include "ethsim/mesoscopic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ethsim/error.hpp"
#include "ethsim/rng.hpp"

namespace ethsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> xs) {
  double m = -kInf;
  for (double x : xs) m = std::max(m, x);
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// x log(y), with 0 log 0 = 0.
double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

void check_nu(const DeFinettiModel& model, std::size_t nu, const char* what) {
  if (nu >= model.size()) {
    throw InvalidArgument(std::string(what) + ": nu = " + std::to_string(nu) + " out of range");
  }
}

std::size_t count_plus(std::span<const std::int8_t> clicks) {
  std::size_t k = 0;
  for (std::int8_t c : clicks) {
    if (c == 1) {
      ++k;
    } else if (c != -1) {
      throw InvalidArgument("click values must be +1 or -1");
    }
  }
  return k;
}

// log pi(nu) + k log p + (n - k) log(1 - p), per nu.
std::vector<double> joint_logs(const DeFinettiModel& model, std::size_t n, std::size_t k) {
  std::vector<double> out(model.size());
  for (std::size_t nu = 0; nu < model.size(); ++nu) {
    const double p = model.p_plus()[nu];
    out[nu] = std::log(model.weights()[nu]) + xlogy(double(k), p) + xlogy(double(n - k), 1.0 - p);
  }
  return out;
}

bool in_band(std::size_t k, std::size_t n, double centre, double eps) {
  return std::abs(double(k) / double(n) - centre) < eps;
}

double raw_epsilon(const BandSchedule& s, std::size_t n) {
  return s.prefactor * std::pow(double(n), -s.exponent);
}

}  // namespace

DeFinettiModel::DeFinettiModel(std::vector<double> weights, std::vector<double> p_plus, double tau)
    : weights_(std::move(weights)), p_plus_(std::move(p_plus)), tau_(tau) {
  if (weights_.empty()) throw InvalidArgument("DeFinettiModel: no values of nu");
  if (weights_.size() != p_plus_.size()) {
    throw InvalidArgument("DeFinettiModel: " + std::to_string(weights_.size()) + " weights for " +
                          std::to_string(p_plus_.size()) + " conditionals");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("DeFinettiModel: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidArgument("DeFinettiModel: weights sum to " + format_label(total));
  }
  for (double p : p_plus_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidArgument("DeFinettiModel: conditional probability " + format_label(p) +
                            " outside [0, 1]");
    }
  }
  if (!(tau_ > 0.0) || !std::isfinite(tau_)) {
    throw InvalidArgument("DeFinettiModel: emission period must be positive");
  }
}

double DeFinettiModel::conditional(std::int8_t xi, std::size_t nu) const {
  check_nu(*this, nu, "conditional");
  if (xi == 1) return p_plus_[nu];
  if (xi == -1) return 1.0 - p_plus_[nu];
  throw InvalidArgument("conditional: click value must be +1 or -1");
}

double DeFinettiModel::kappa() const {
  if (size() < 2) return 0.0;
  double k = kInf;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) k = std::min(k, std::abs(p_plus_[i] - p_plus_[j]));
  }
  return k;
}

double BandSchedule::epsilon(std::size_t n) const {
  if (!(exponent > 0.0 && exponent < 0.5)) {
    throw InvalidArgument("band schedule exponent must lie in (0, 1/2)");
  }
  if (n == 0) throw InvalidArgument("band schedule: n must be positive");
  const double e = raw_epsilon(*this, n);
  if (!(e > 0.0 && e < 1.0)) {
    throw InvalidArgument("band half-width " + format_label(e) + " at n = " + std::to_string(n) +
                          " is outside (0, 1)");
  }
  return e;
}

SampledProtocol sample_protocol(const DeFinettiModel& model, std::size_t n, std::uint64_t seed,
                                std::uint64_t stream) {
  CounterRng rng(seed, stream);
  SampledProtocol out;
  const double u = rng.uniform();
  double acc = 0.0;
  out.nu = model.size() - 1;
  for (std::size_t nu = 0; nu < model.size(); ++nu) {
    acc += model.weights()[nu];
    if (u < acc && model.weights()[nu] > 0.0) {
      out.nu = nu;
      break;
    }
  }
  while (model.weights()[out.nu] == 0.0) --out.nu;  // rounding in the last partial sum
  const double p = model.p_plus()[out.nu];
  out.clicks.resize(n);
  for (auto& c : out.clicks) c = rng.uniform() < p ? 1 : -1;
  return out;
}

std::vector<SampledProtocol> sample_protocols(const DeFinettiModel& model, std::size_t n,
                                              std::size_t count, std::uint64_t seed) {
  std::vector<SampledProtocol> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_protocol(model, n, seed, i));
  return out;
}

double log_protocol_probability(const DeFinettiModel& model, std::span<const std::int8_t> clicks) {
  const std::size_t k = count_plus(clicks);
  return log_sum_exp(joint_logs(model, clicks.size(), k));
}

double exact_protocol_probability(const DeFinettiModel& model, std::span<const std::int8_t> clicks) {
  return std::exp(log_protocol_probability(model, clicks));
}

double frequency(std::span<const std::int8_t> clicks, std::int8_t xi) {
  if (clicks.empty()) throw InvalidArgument("frequency: empty protocol");
  if (xi != 1 && xi != -1) throw InvalidArgument("frequency: click value must be +1 or -1");
  const std::size_t k = count_plus(clicks);
  const double f = double(k) / double(clicks.size());
  return xi == 1 ? f : double(clicks.size() - k) / double(clicks.size());
}

Classification classify(std::span<const std::int8_t> clicks, const DeFinettiModel& model,
                        const ClassificationBand& band) {
  if (!(band.epsilon > 0.0 && band.epsilon < 1.0)) {
    throw InvalidArgument("classify: band half-width must lie in (0, 1)");
  }
  if (band.n != 0 && band.n != clicks.size()) {
    throw InvalidArgument("classify: band is for n = " + std::to_string(band.n) +
                          ", protocol has length " + std::to_string(clicks.size()));
  }
  Classification c;
  c.overlap_possible = model.size() > 1 && band.epsilon >= 0.5 * model.kappa();
  const std::size_t k = count_plus(clicks);
  if (clicks.empty()) throw InvalidArgument("classify: empty protocol");
  for (std::size_t nu = 0; nu < model.size(); ++nu) {
    if (in_band(k, clicks.size(), model.p_plus()[nu], band.epsilon)) {
      if (c.matches++ == 0) c.nu = nu;
    }
  }
  if (c.matches > 1) c.nu.reset();
  return c;
}

double log_binomial_pmf(std::size_t n, std::size_t k, double p) {
  if (k > n) return -kInf;
  const double lc = std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) -
                    std::lgamma(double(n - k) + 1);
  if ((p == 0.0 && k > 0) || (p == 1.0 && k < n)) return -kInf;
  return lc + xlogy(double(k), p) + xlogy(double(n - k), 1.0 - p);
}

double band_mass(const DeFinettiModel& model, std::size_t nu_band, std::size_t nu_true,
                 std::size_t n, double eps) {
  check_nu(model, nu_band, "band_mass");
  check_nu(model, nu_true, "band_mass");
  if (n == 0) throw InvalidArgument("band_mass: n must be positive");
  const double centre = model.p_plus()[nu_band];
  const double p = model.p_plus()[nu_true];
  std::vector<double> terms;
  for (std::size_t k = 0; k <= n; ++k) {
    if (in_band(k, n, centre, eps)) terms.push_back(log_binomial_pmf(n, k, p));
  }
  return std::exp(log_sum_exp(terms));
}

BornRuleResult born_rule_experiment(const DeFinettiModel& model, const BandSchedule& schedule,
                                    std::size_t n, std::size_t count, std::uint64_t seed) {
  BornRuleResult r;
  r.n = n;
  r.count = count;
  r.epsilon = schedule.epsilon(n);
  const ClassificationBand band{n, r.epsilon};
  std::vector<std::size_t> hits(model.size(), 0);
  std::size_t classified = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const SampledProtocol sp = sample_protocol(model, n, seed, i);
    const Classification c = classify(sp.clicks, model, band);
    if (c.nu) {
      ++hits[*c.nu];
      ++classified;
    }
  }
  for (std::size_t nu = 0; nu < model.size(); ++nu) {
    BornRuleRow row;
    row.nu = nu;
    row.weight = model.weights()[nu];
    row.empirical = count ? double(hits[nu]) / double(count) : 0.0;
    for (std::size_t truth = 0; truth < model.size(); ++truth) {
      if (model.weights()[truth] > 0.0) {
        row.exact += model.weights()[truth] * band_mass(model, nu, truth, n, r.epsilon);
      }
    }
    r.rows.push_back(row);
  }
  r.coverage = count ? double(classified) / double(count) : 0.0;
  // Exact coverage counts each k once even if bands overlap (then a match in
  // two bands is unclassified and not covered).
  for (std::size_t k = 0; k <= n; ++k) {
    std::size_t m = 0;
    for (std::size_t nu = 0; nu < model.size(); ++nu) m += in_band(k, n, model.p_plus()[nu], r.epsilon);
    if (m != 1) continue;
    for (std::size_t truth = 0; truth < model.size(); ++truth) {
      if (model.weights()[truth] > 0.0) {
        r.exact_coverage +=
            model.weights()[truth] * std::exp(log_binomial_pmf(n, k, model.p_plus()[truth]));
      }
    }
  }
  return r;
}

double entropy_bits(std::span<const double> weights) {
  double h = 0.0;
  for (double w : weights) {
    if (w > 0.0) h -= w * std::log2(w);
  }
  return std::max(0.0, h);
}

Posterior posterior(const DeFinettiModel& model, std::span<const std::int8_t> clicks) {
  const std::size_t k = count_plus(clicks);
  const std::vector<double> logs = joint_logs(model, clicks.size(), k);
  const double norm = log_sum_exp(logs);
  if (norm == -kInf) throw ZeroProbabilityBranch("posterior: protocol has probability zero");
  Posterior out;
  out.weights.reserve(logs.size());
  for (double l : logs) out.weights.push_back(std::exp(l - norm));
  out.entropy_bits = entropy_bits(out.weights);
  return out;
}

double bernoulli_kl_nats(double q, double p) {
  double kl = 0.0;
  for (const auto& [a, b] : {std::pair{q, p}, std::pair{1.0 - q, 1.0 - p}}) {
    if (a == 0.0) continue;
    if (b == 0.0) return kInf;
    kl += a * std::log(a / b);
  }
  return std::max(0.0, kl);
}

double relative_entropy(const DeFinettiModel& model, std::size_t nu1, std::size_t nu2) {
  check_nu(model, nu1, "relative_entropy");
  check_nu(model, nu2, "relative_entropy");
  return bernoulli_kl_nats(model.p_plus()[nu1], model.p_plus()[nu2]) / std::numbers::ln2;
}

SanovReport sanov_check(const DeFinettiModel& model, std::size_t nu1, std::size_t nu2,
                        const BandSchedule& schedule, std::span<const std::size_t> n_values) {
  check_nu(model, nu1, "sanov_check");
  check_nu(model, nu2, "sanov_check");
  const double kappa = model.kappa();
  SanovReport rep;
  rep.nu1 = nu1;
  rep.nu2 = nu2;
  rep.reference_exponent = relative_entropy(model, nu1, nu2) * std::numbers::ln2;
  const double centre = model.p_plus()[nu1];
  const double p = model.p_plus()[nu2];
  for (std::size_t n : n_values) {
    SanovRow row;
    row.n = n;
    row.epsilon = schedule.epsilon(n);
    if (model.size() > 1 && row.epsilon >= 0.5 * kappa) {
      throw InvalidArgument("sanov_check: eps_n = " + format_label(row.epsilon) + " at n = " +
                            std::to_string(n) + " is not below kappa/2 = " +
                            format_label(0.5 * kappa));
    }
    row.band_mass = band_mass(model, nu1, nu2, n, row.epsilon);
    row.empirical_exponent = row.band_mass > 0.0 ? -std::log(row.band_mass) / double(n) : kInf;
    // KL(q || p) is convex in q, so its infimum over the open band is at the
    // edge nearest to p, or zero when p lies inside.
    const double lo = std::max(0.0, centre - row.epsilon);
    const double hi = std::min(1.0, centre + row.epsilon);
    row.band_kl_exponent = (p > lo && p < hi) ? 0.0 : bernoulli_kl_nats(p <= lo ? lo : hi, p);
    rep.rows.push_back(row);
  }
  rep.prefactor = 0.0;
  for (const auto& row : rep.rows) {
    rep.prefactor =
        std::max(rep.prefactor, row.band_mass * std::exp(double(row.n) * rep.reference_exponent));
  }
  rep.holds = std::isfinite(rep.prefactor);
  for (auto& row : rep.rows) {
    row.bound = rep.prefactor * std::exp(-double(row.n) * rep.reference_exponent);
    rep.holds = rep.holds && row.band_mass <= row.bound * (1.0 + 1e-12);
  }
  return rep;
}

DetectionTime detection_time(const DeFinettiModel& model, const BandSchedule& calibration,
                             std::size_t n_max) {
  if (model.size() < 2) throw InvalidArgument("detection_time: need at least two values of nu");
  DetectionTime out;
  out.sigma_min_bits = kInf;
  for (std::size_t a = 0; a < model.size(); ++a) {
    for (std::size_t b = 0; b < model.size(); ++b) {
      if (a == b) continue;
      const double s = relative_entropy(model, a, b);
      out.pairs.push_back({a, b, s});
      out.sigma_min_bits = std::min(out.sigma_min_bits, s);
    }
  }
  if (!(out.sigma_min_bits > 0.0)) {
    throw InvalidArgument("detection_time: indistinguishable hypotheses (sigma_min = 0)");
  }
  out.time = model.tau() / out.sigma_min_bits;
  // The calibration scan starts at n = 1, where the bands still cover
  // everything; it is not restricted to the regime eps_n < kappa/2.
  for (std::size_t n = 1; n <= n_max && !out.n_star; ++n) {
    const double eps = raw_epsilon(calibration, n);
    double worst = 0.0;
    for (const auto& pr : out.pairs) {
      worst = std::max(worst, band_mass(model, pr.nu1, pr.nu2, n, eps));
    }
    if (worst <= std::exp(-1.0)) out.n_star = n;
  }
  if (out.n_star) out.calibration = double(*out.n_star) * out.sigma_min_bits * std::numbers::ln2;
  return out;
}

CommutingRealization commuting_realization(const DeFinettiModel& model, std::size_t n) {
  if (n == 0 || n > 10) throw InvalidArgument("commuting_realization: n must lie in [1, 10]");
  const std::size_t m = model.size();
  const std::size_t probes = std::size_t{1} << n;
  const auto dim = static_cast<Eigen::Index>(m * probes);

  // Probe k is bit (n - 1 - k) of the probe index; bit 0 reads +1.
  auto rotation = [&](std::size_t k) {
    const std::size_t mask = probes >> (k + 1);
    Matrix c = Matrix::Zero(dim, dim);
    for (std::size_t nu = 0; nu < m; ++nu) {
      const double cs = std::sqrt(model.p_plus()[nu]);
      const double sn = std::sqrt(1.0 - model.p_plus()[nu]);
      // R = [[cs, -sn], [sn, cs]] on (|0>, |1>).
      for (std::size_t b = 0; b < probes; ++b) {
        const auto col = static_cast<Eigen::Index>(nu * probes + b);
        const auto flip = static_cast<Eigen::Index>(nu * probes + (b ^ mask));
        const bool one = (b & mask) != 0;
        c(col, col) = cs;
        c(flip, col) = one ? -sn : sn;
      }
    }
    return c;
  };
  auto probe_partition = [&](std::size_t k) {
    const std::size_t mask = probes >> (k + 1);
    Vector plus(dim), minus(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const bool one = (std::size_t(i) % probes & mask) != 0;
      plus(i) = one ? 0.0 : 1.0;
      minus(i) = one ? 1.0 : 0.0;
    }
    return PartitionOfUnity({kClickPlus, kClickMinus},
                            {Operator(Matrix(plus.asDiagonal())), Operator(Matrix(minus.asDiagonal()))});
  };

  std::vector<FrameStep> steps;
  steps.push_back(FrameStep{0.0, Operator::identity(std::size_t(dim)), {}, std::nullopt});
  Matrix w = Matrix::Identity(dim, dim);
  for (std::size_t k = 0; k < n; ++k) {
    w = rotation(k) * w;
    steps.push_back(FrameStep{double(k + 1) * model.tau(), Operator(w), {probe_partition(k)},
                              std::nullopt});
  }
  Vector diag = Vector::Zero(dim);
  for (std::size_t nu = 0; nu < m; ++nu) diag(static_cast<Eigen::Index>(nu * probes)) = model.weights()[nu];
  return CommutingRealization{HeisenbergFrame(std::size_t(dim), std::move(steps)),
                              DensityState(Operator(Matrix(diag.asDiagonal())))};
}

}  // namespace ethsim
