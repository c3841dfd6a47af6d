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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ethsim/error.hpp"
#include "ethsim/histories.hpp"
#include "ethsim/mesoscopic.hpp"
#include "test_util.hpp"

namespace ethsim {
namespace {

const DeFinettiModel kRef({0.4, 0.6}, {0.8, 0.3});

Clicks all_clicks(std::size_t n, std::uint64_t code) {
  Clicks c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = (code >> i) & 1 ? -1 : 1;
  return c;
}

// Binomial pmf by the multiplicative recurrence in long double.
std::vector<long double> binomial_row(std::size_t n, long double p) {
  std::vector<long double> row(n + 1);
  row[0] = std::pow(1.0L - p, static_cast<long double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    row[k + 1] = row[k] * static_cast<long double>(n - k) / static_cast<long double>(k + 1) * p /
                 (1.0L - p);
  }
  return row;
}

double band_mass_oracle(std::size_t n, double centre, double eps, double p) {
  const auto row = binomial_row(n, p);
  long double s = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    if (std::abs(double(k) / double(n) - centre) < eps) s += row[k];
  }
  return static_cast<double>(s);
}

TEST(Model, Validation) {
  EXPECT_THROW(DeFinettiModel({0.5, 0.6}, {0.1, 0.2}), InvalidArgument);
  EXPECT_THROW(DeFinettiModel({0.5, 0.5}, {0.1, 1.2}), InvalidArgument);
  EXPECT_THROW(DeFinettiModel({0.5, 0.5}, {0.1}), InvalidArgument);
  EXPECT_THROW(DeFinettiModel({1.0}, {0.1}, 0.0), InvalidArgument);
  EXPECT_NEAR(kRef.kappa(), 0.5, 1e-15);
  EXPECT_NEAR(kRef.conditional(-1, 0), 0.2, 1e-15);
}

TEST(BandSchedule, Validation) {
  EXPECT_NEAR(BandSchedule{}.epsilon(8), 0.5, 1e-15);
  EXPECT_THROW((BandSchedule{0.5, 1.0}.epsilon(10)), InvalidArgument);
  EXPECT_THROW((BandSchedule{0.0, 1.0}.epsilon(10)), InvalidArgument);
  EXPECT_THROW((BandSchedule{1.0 / 3.0, 1.0}.epsilon(1)), InvalidArgument);
}

TEST(ProtocolProbability, Examples) {
  EXPECT_NEAR(exact_protocol_probability(kRef, Clicks{1}), 0.5, 1e-15);
  EXPECT_NEAR(exact_protocol_probability(kRef, Clicks{1, 1}), 0.310, 1e-15);
  EXPECT_EQ(exact_protocol_probability(kRef, Clicks{}), 1.0);
  const DeFinettiModel sure({1.0}, {1.0});
  EXPECT_EQ(log_protocol_probability(sure, Clicks{-1}), -INFINITY);
}

TEST(ProtocolProbability, Exchangeable) {
  for (std::size_t n = 1; n <= 6; ++n) {
    for (std::uint64_t code = 0; code < (1u << n); ++code) {
      Clicks c = all_clicks(n, code);
      const double p = exact_protocol_probability(kRef, c);
      std::sort(c.begin(), c.end());
      do {
        EXPECT_NEAR(exact_protocol_probability(kRef, c), p, 1e-15);
      } while (std::next_permutation(c.begin(), c.end()));
    }
  }
}

TEST(ProtocolProbability, MarginalConsistency) {
  for (std::size_t n = 0; n <= 8; ++n) {
    double total = 0;
    for (std::uint64_t code = 0; code < (1u << n); ++code) {
      Clicks c = all_clicks(n, code);
      const double p = exact_protocol_probability(kRef, c);
      total += p;
      c.push_back(1);
      double s = exact_protocol_probability(kRef, c);
      c.back() = -1;
      s += exact_protocol_probability(kRef, c);
      EXPECT_NEAR(s, p, 1e-14);
    }
    EXPECT_NEAR(total, 1.0, 1e-14);
  }
}

TEST(Sampling, DeterministicAndMarginal) {
  const auto a = sample_protocols(kRef, 30, 50, 77);
  const auto b = sample_protocols(kRef, 30, 50, 77);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].nu, b[i].nu);
    EXPECT_EQ(a[i].clicks, b[i].clicks);
    EXPECT_EQ(a[i].clicks, sample_protocol(kRef, 30, 77, i).clicks);
  }
  std::size_t plus = 0;
  const std::size_t draws = 100000;
  for (const auto& s : sample_protocols(kRef, 1, draws, 3)) plus += s.clicks[0] == 1;
  EXPECT_NEAR(double(plus) / double(draws), 0.5, 0.005);
}

TEST(Sampling, LawOfLargeNumbersGivenNu) {
  for (const auto& s : sample_protocols(kRef, 5000, 40, 8)) {
    EXPECT_NEAR(frequency(s.clicks, 1), kRef.p_plus()[s.nu], 0.05);
  }
}

TEST(Classify, Examples) {
  Clicks c(500, -1);
  std::fill(c.begin(), c.begin() + 395, 1);  // f = 0.79
  auto r = classify(c, kRef, {500, 0.06});
  ASSERT_TRUE(r.nu.has_value());
  EXPECT_EQ(*r.nu, 0u);
  EXPECT_FALSE(r.overlap_possible);
  std::fill(c.begin(), c.end(), -1);
  std::fill(c.begin(), c.begin() + 275, 1);  // f = 0.55
  r = classify(c, kRef, {500, 0.06});
  EXPECT_FALSE(r.nu.has_value());
  EXPECT_EQ(r.matches, 0u);
  r = classify(c, kRef, {500, 0.3});
  EXPECT_FALSE(r.nu.has_value());
  EXPECT_EQ(r.matches, 2u);
  EXPECT_TRUE(r.overlap_possible);
  EXPECT_THROW(frequency(Clicks{}, 1), InvalidArgument);
}

TEST(BandMass, MatchesBinomialOracle) {
  for (std::size_t n : {10u, 50u, 100u, 200u, 400u, 500u}) {
    for (double eps : {0.05, 0.1, std::pow(double(n), -0.45)}) {
      for (std::size_t band = 0; band < 2; ++band) {
        for (std::size_t truth = 0; truth < 2; ++truth) {
          const double want = band_mass_oracle(n, kRef.p_plus()[band], eps, kRef.p_plus()[truth]);
          const double got = band_mass(kRef, band, truth, n, eps);
          EXPECT_NEAR(got, want, 1e-12 * std::max(want, 1e-300) + 1e-300) << n << " " << eps;
        }
      }
    }
  }
}

TEST(BandMass, FrozenCrossBandValues) {
  // Band of nu = 0 under nu = 1 with eps = n^-0.45.
  EXPECT_NEAR(band_mass(kRef, 0, 1, 50, std::pow(50.0, -0.45)) / 7.06e-7, 1.0, 0.01);
  EXPECT_NEAR(band_mass(kRef, 0, 1, 100, std::pow(100.0, -0.45)) / 5.47e-15, 1.0, 0.01);
}

TEST(BornRule, ShortProtocolsLeaveGapsAndCoverageGrows) {
  const BandSchedule sched{};
  const auto r10 = born_rule_experiment(kRef, sched, 10, 0, 1);
  EXPECT_LT(r10.exact_coverage, 0.99);
  // Lattice effects allow dips of order 1e-6 once coverage is near one.
  double prev = 0;
  for (std::size_t n : {10u, 20u, 27u, 40u, 64u, 100u, 125u, 216u, 343u, 512u}) {
    const auto r = born_rule_experiment(kRef, sched, n, 0, 1);
    EXPECT_GT(r.exact_coverage, prev - 1e-5) << n;
    prev = r.exact_coverage;
  }
}

TEST(BornRule, EmpiricalNearExact) {
  const auto r = born_rule_experiment(kRef, BandSchedule{}, 200, 5000, 2026);
  ASSERT_EQ(r.rows.size(), 2u);
  for (const auto& row : r.rows) EXPECT_NEAR(row.empirical, row.exact, 0.03);
  EXPECT_GE(r.coverage, 0.95);
}

TEST(Posterior, Examples) {
  const auto p = posterior(kRef, Clicks{1, 1});
  EXPECT_NEAR(p.weights[0], 0.256 / 0.310, 1e-14);
  EXPECT_NEAR(p.weights[0], 0.8258, 1e-4);
  const auto empty = posterior(kRef, Clicks{});
  EXPECT_NEAR(empty.weights[0], 0.4, 1e-15);
  const DeFinettiModel sharp({0.5, 0.5}, {1.0, 0.0});
  EXPECT_THROW(posterior(sharp, Clicks{1, -1}), ZeroProbabilityBranch);
}

TEST(Posterior, EntropyShrinksWithLength) {
  double mean = 0;
  const auto samples = sample_protocols(kRef, 200, 2000, 4);
  for (const auto& s : samples) mean += posterior(kRef, s.clicks).entropy_bits;
  EXPECT_LE(mean / double(samples.size()), 0.01);
}

TEST(Entropy, Values) {
  const std::vector<double> half = {0.5, 0.5};
  EXPECT_NEAR(entropy_bits(half), 1.0, 1e-15);
  const std::vector<double> sure = {1.0, 0.0};
  EXPECT_EQ(entropy_bits(sure), 0.0);
}

TEST(RelativeEntropy, Examples) {
  const DeFinettiModel m({0.5, 0.5}, {0.5, 0.25});
  EXPECT_NEAR(relative_entropy(m, 0, 1), 0.5 + 0.5 * std::log2(2.0 / 3.0), 1e-15);
  EXPECT_NEAR(relative_entropy(m, 0, 1), 0.20752, 1e-5);
  EXPECT_NEAR(relative_entropy(kRef, 0, 1), 0.7705, 1e-4);
  EXPECT_NEAR(relative_entropy(kRef, 1, 0), 0.8407, 1e-4);
  EXPECT_EQ(relative_entropy(kRef, 0, 0), 0.0);
  const DeFinettiModel sharp({0.5, 0.5}, {0.5, 1.0});
  EXPECT_EQ(relative_entropy(sharp, 0, 1), INFINITY);
}

TEST(RelativeEntropy, GibbsInequality) {
  CounterRng rng(50, 0);
  for (int t = 0; t < 200; ++t) {
    const double a = rng.uniform();
    const double b = 0.01 + 0.98 * rng.uniform();
    const DeFinettiModel m({0.5, 0.5}, {a, b});
    EXPECT_GE(relative_entropy(m, 0, 1), 0.0);
    EXPECT_NEAR(bernoulli_kl_nats(a, b) / std::log(2.0), relative_entropy(m, 0, 1), 1e-12);
  }
}

TEST(Sanov, BandExponentMatchesGridSearch) {
  const BandSchedule sched{0.45, 1.0};
  const std::vector<std::size_t> ns = {50, 100, 200, 400};
  const auto rep = sanov_check(kRef, 0, 1, sched, ns);
  ASSERT_EQ(rep.rows.size(), 4u);
  EXPECT_NEAR(rep.reference_exponent, relative_entropy(kRef, 0, 1) * std::log(2.0), 1e-15);
  for (const auto& row : rep.rows) {
    double best = INFINITY;
    for (int i = 1; i < 200000; ++i) {
      const double q = 0.8 - row.epsilon + 2.0 * row.epsilon * i / 200000.0;
      best = std::min(best, q * std::log(q / 0.3) + (1 - q) * std::log((1 - q) / 0.7));
    }
    // Grid spacing bounds the oracle's resolution at about 2e-6.
    EXPECT_NEAR(row.band_kl_exponent, best, 1e-5) << row.n;
    EXPECT_LE(row.band_kl_exponent, best);
    EXPECT_LE(row.band_mass, row.bound * (1 + 1e-12));
  }
  EXPECT_TRUE(rep.holds);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    EXPECT_LT(rep.rows[i].band_mass, rep.rows[i - 1].band_mass);
  }
  const auto& last = rep.rows.back();
  EXPECT_NEAR(last.empirical_exponent / last.band_kl_exponent, 1.0, 0.1);
}

TEST(Sanov, RejectsOverlappingBands) {
  const std::vector<std::size_t> ns = {4};
  EXPECT_THROW(sanov_check(kRef, 0, 1, BandSchedule{0.45, 1.0}, ns), InvalidArgument);
}

TEST(DetectionTime, ReferenceModel) {
  const auto dt = detection_time(kRef);
  EXPECT_NEAR(dt.sigma_min_bits, 0.7705, 1e-4);
  EXPECT_NEAR(dt.time, 1.298, 1e-3);
  EXPECT_EQ(dt.pairs.size(), 2u);
  ASSERT_TRUE(dt.n_star.has_value());
  EXPECT_NEAR(dt.calibration, double(*dt.n_star) * dt.sigma_min_bits * std::log(2.0), 1e-12);
  const DeFinettiModel slow({0.4, 0.6}, {0.8, 0.3}, 2.0);
  EXPECT_NEAR(detection_time(slow).time, 2.0 * dt.time, 1e-12);
  const DeFinettiModel same({0.4, 0.6}, {0.5, 0.5});
  EXPECT_THROW(detection_time(same), InvalidArgument);
}

TEST(Realization, LswMatchesMixture) {
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto r = commuting_realization(kRef, n);
    EXPECT_EQ(r.frame.dim(), 2u << n);
    for (std::uint64_t code = 0; code < (1u << n); ++code) {
      const Clicks c = all_clicks(n, code);
      std::vector<std::string> labels;
      for (auto x : c) labels.push_back(x == 1 ? kClickPlus : kClickMinus);
      const auto p = MeasurementProtocol::from_labels(r.frame, labels);
      EXPECT_NEAR(lsw_probability(r.frame, r.state, p), exact_protocol_probability(kRef, c), 1e-12);
    }
  }
}

TEST(Realization, ThreeValuedModelIsConsistent) {
  const DeFinettiModel m({0.2, 0.5, 0.3}, {0.9, 0.5, 0.1});
  const auto r = commuting_realization(m, 3);
  const auto c = consistency_check(r.frame, r.state, 3);
  EXPECT_LE(c.max_prefix_residual, 1e-12);
  EXPECT_LE(c.normalization_residual, 1e-12);
  EXPECT_THROW(commuting_realization(m, 0), InvalidArgument);
}

}  // namespace
}  // namespace ethsim
