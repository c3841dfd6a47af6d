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

// Detection of events, Born sampling and state updates along a discrete
// sequence of times in the Heisenberg picture.
//
// A frame lists times t_0 < t_1 < ... with propagators U(t_k, t_0).  Candidate
// partitions are given at t_0 and evolve as Pi(t_k) = U* Pi U.  Optionally
// each time carries the algebra of operators still accessible from then on;
// it defaults to the full matrix algebra.  An event from a partition happens
// at t_k when every projection sits within threshold/N (operator norm) of
// its conditional expectation onto the center of the state's centralizer.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ethsim/algebra.hpp"
#include "ethsim/operator.hpp"
#include "ethsim/state_analysis.hpp"

namespace ethsim {

/// Default fraction of the Born-weight gap used as detection threshold.
inline constexpr double kDefaultSafety = 0.5;

struct FrameStep {
  double time = 0.0;
  /// U(t, t_0).
  Operator propagator;
  /// Candidate families at t_0; empty when nothing can be observed at t.
  std::vector<PartitionOfUnity> partitions;
  /// Accessible algebra from t on; nullopt means all of M_d.
  std::optional<FiniteAlgebra> restriction;
};

class HeisenbergFrame {
 public:
  /// Validates: at least one step, strictly increasing times, unitary
  /// propagators with U(t_0, t_0) = 1, matching dimensions, and restriction
  /// algebras that shrink (weakly) in time.
  HeisenbergFrame(std::size_t dim, std::vector<FrameStep> steps, double tol = kDefaultTol);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return steps_.size(); }
  const FrameStep& step(std::size_t k) const { return steps_.at(k); }
  double time(std::size_t k) const { return steps_.at(k).time; }

  /// Candidate families at t_k in the Heisenberg picture.
  const std::vector<PartitionOfUnity>& partitions_at(std::size_t k) const {
    return evolved_.at(k);
  }
  const std::optional<FiniteAlgebra>& restriction_at(std::size_t k) const {
    return steps_.at(k).restriction;
  }

  /// Indices of steps carrying at least one candidate family.
  std::vector<std::size_t> observable_steps() const;
  std::optional<std::size_t> step_of_time(double t) const;

  /// The first `count` steps.
  HeisenbergFrame truncated(std::size_t count) const;

 private:
  std::size_t dim_;
  std::vector<FrameStep> steps_;
  std::vector<std::vector<PartitionOfUnity>> evolved_;
};

struct DetectionVerdict {
  bool happened = false;
  /// False when the Born weights leave no positive threshold.
  bool admissible = false;
  double time = 0.0;
  std::size_t step = 0;
  std::size_t family = 0;
  /// max_j ||e_rho(Pi_j(t)) - Pi_j(t)||
  double distance = 0.0;
  /// Delta_t / N (0 when inadmissible).
  double threshold = 0.0;
  /// min_{i != j} |rho(Pi_i(t) - Pi_j(t))|
  double gap = 0.0;
  PartitionOfUnity partition;
};

struct EventRecord {
  double time = 0.0;
  std::string outcome;
  double probability = 0.0;
  bool recorded = true;
};

/// Delta_t = safety * min_{i != j} |rho(Pi_i - Pi_j)|.  Throws
/// InadmissibleThreshold when the partition has a single element or the
/// minimum is within tolerance of zero, InvalidArgument unless 0 < safety < 1.
double admissible_threshold(const DensityState& rho, const PartitionOfUnity& partition,
                            double safety = kDefaultSafety);

/// The smallest pairwise Born-weight difference (0 for a single outcome).
double born_weight_gap(const DensityState& rho, const PartitionOfUnity& partition);

/// Distance criterion against an already analysed (algebra, state) pair.
/// Throws OutsideAlgebra if a projection is not in the analysed algebra.
DetectionVerdict detect_event(const StateAnalysis& analysis, const PartitionOfUnity& partition,
                              double safety = kDefaultSafety);

/// Distance criterion for candidate `family` at step `step` of the frame.
DetectionVerdict detect_event(const HeisenbergFrame& frame, const DensityState& rho,
                              std::size_t step, std::size_t family,
                              double safety = kDefaultSafety);

/// All candidate verdicts at one step plus the selected family.
struct StepScan {
  double time = 0.0;
  std::size_t step = 0;
  std::vector<DetectionVerdict> candidates;
  /// Fired family with the smallest distance, if any fired.
  std::optional<std::size_t> selected;
  /// Several families fired at once; `margin` is the distance gap between
  /// the best and second-best.
  bool ambiguous = false;
  double margin = 0.0;
};

StepScan scan_step(const HeisenbergFrame& frame, const DensityState& rho, std::size_t step,
                   double safety = kDefaultSafety);

struct EarliestEvent {
  /// First step at which some family fires; empty means no event up to the
  /// end of the frame.
  std::optional<std::size_t> t_min;
  /// Step of smallest distance within the contiguous run of firing steps
  /// that starts at t_min.
  std::optional<std::size_t> t_star;
  /// Last step of that run.
  std::optional<std::size_t> run_end;
  std::vector<StepScan> scans;
};

EarliestEvent earliest_event(const HeisenbergFrame& frame, const DensityState& rho,
                             double safety = kDefaultSafety);

/// rho(Pi_xi) per label, negatives from rounding clamped to zero.
std::vector<std::pair<std::string, double>> born_probabilities(const DensityState& rho,
                                                               const PartitionOfUnity& partition);

/// Pi P Pi / p.  Throws ZeroProbabilityBranch when p <= tol and
/// InvalidArgument when p disagrees with rho(Pi).
DensityState collapse(const DensityState& rho, const Operator& projection, double p);
DensityState collapse(const DensityState& rho, const Operator& projection);

/// sum_xi Pi_xi P Pi_xi.
DensityState unrecorded_update(const DensityState& rho, const PartitionOfUnity& partition);

class RecordPolicy {
 public:
  static RecordPolicy always() { return RecordPolicy(Kind::kAlways, {}); }
  static RecordPolicy never() { return RecordPolicy(Kind::kNever, {}); }
  /// Records only events at the listed step indices.
  static RecordPolicy at_steps(std::set<std::size_t> steps) {
    return RecordPolicy(Kind::kSteps, std::move(steps));
  }

  bool records(std::size_t step) const {
    return kind_ == Kind::kAlways || (kind_ == Kind::kSteps && steps_.count(step) > 0);
  }

 private:
  enum class Kind { kAlways, kNever, kSteps };
  RecordPolicy(Kind kind, std::set<std::size_t> steps) : kind_(kind), steps_(std::move(steps)) {}
  Kind kind_;
  std::set<std::size_t> steps_;
};

enum class DetectionMode {
  /// Events happen only where the distance criterion fires.
  kCriterion,
  /// Every step with a candidate family is an event of its first family;
  /// this is the sequential-measurement reading of a protocol.
  kForced,
};

struct TrajectoryOptions {
  double safety = kDefaultSafety;
  DetectionMode mode = DetectionMode::kCriterion;
  RecordPolicy record = RecordPolicy::always();
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

struct BranchEntry {
  std::size_t step = 0;
  std::size_t family = 0;
  EventRecord event;
  /// Distance and threshold of the firing verdict (forced mode: 0, 0).
  double distance = 0.0;
  double threshold = 0.0;
  bool ambiguous = false;
};

struct Trajectory {
  /// Recorded events only.
  std::vector<EventRecord> history;
  DensityState final_state;
  /// Every event, recorded or not, in time order.
  std::vector<BranchEntry> branch_log;
  /// Per-step verdicts (criterion mode only).
  std::vector<StepScan> scans;
};

/// Sequential event recursion: at each step where an event happens, draw an
/// outcome from the Born weights and either collapse onto it (recorded) or
/// replace the state by the incoherent sum over the family (unrecorded).
/// Deterministic in (options.seed, options.stream).
Trajectory run_trajectory(const HeisenbergFrame& frame, const DensityState& rho0,
                          const TrajectoryOptions& options);

}  // namespace ethsim
