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

// The history measure
//
//   mu(xi_1, ..., xi_n) = rho(Pi_1(t_1) ... Pi_n(t_n) ... Pi_1(t_1))
//
// on outcome sequences of a Heisenberg frame, its consistency, and a
// comparison with the sequential sampler.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ethsim/event_engine.hpp"
#include "ethsim/operator.hpp"

namespace ethsim {

struct ProtocolEntry {
  std::size_t step = 0;
  std::string outcome;
  std::size_t family = 0;
};

/// Outcome labels at strictly increasing steps of a frame.
class MeasurementProtocol {
 public:
  MeasurementProtocol() = default;
  explicit MeasurementProtocol(std::vector<ProtocolEntry> entries);

  /// Assigns labels[k] to the k-th observable step of the frame, family 0.
  static MeasurementProtocol from_labels(const HeisenbergFrame& frame,
                                         const std::vector<std::string>& labels);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<ProtocolEntry>& entries() const noexcept { return entries_; }
  std::vector<std::string> labels() const;

  /// Throws InvalidArgument if a step, family or label does not exist in
  /// `frame`.
  void validate(const HeisenbergFrame& frame) const;

 private:
  std::vector<ProtocolEntry> entries_;
};

struct LswValue {
  /// Clamped to [0, 1].
  double probability = 0.0;
  /// Value before clamping.
  double raw = 0.0;
  /// |raw - probability|
  double clamped_by = 0.0;
};

LswValue lsw_evaluate(const HeisenbergFrame& frame, const DensityState& rho0,
                      const MeasurementProtocol& protocol);
double lsw_probability(const HeisenbergFrame& frame, const DensityState& rho0,
                       const MeasurementProtocol& protocol);

/// Every protocol over the first `n` observable steps (family 0), in
/// lexicographic order of label indices.
std::vector<MeasurementProtocol> enumerate_protocols(const HeisenbergFrame& frame, std::size_t n);

/// Number of length-n protocols; throws InvalidArgument when the frame has
/// fewer than n observable steps.
std::uint64_t protocol_count(const HeisenbergFrame& frame, std::size_t n);

struct ConsistencyReport {
  std::size_t length = 0;
  std::uint64_t leaves = 0;
  /// max over prefixes of |sum_xi mu(prefix, xi) - mu(prefix)|
  double max_prefix_residual = 0.0;
  /// |sum over all length-n protocols - 1|
  double normalization_residual = 0.0;
  double max_clamp = 0.0;
};

/// Exhaustive check of the prefix-marginal identity up to length n.  Throws
/// InvalidArgument when the tree has more than `max_leaves` leaves.
ConsistencyReport consistency_check(const HeisenbergFrame& frame, const DensityState& rho0,
                                    std::size_t n, std::uint64_t max_leaves = 1000000);

struct SamplerComparison {
  double total_variation = 0.0;
  std::uint64_t samples = 0;
  std::vector<std::vector<std::string>> protocols;
  std::vector<double> exact;
  std::vector<double> empirical;
};

/// Runs `samples` forced, always-recorded trajectories over the first n
/// observable steps (trajectory i uses stream i) and compares the histogram
/// of outcome sequences with the exact measure.
SamplerComparison sampler_vs_measure(const HeisenbergFrame& frame, const DensityState& rho0,
                                     std::size_t n, std::uint64_t samples, std::uint64_t seed);

}  // namespace ethsim
