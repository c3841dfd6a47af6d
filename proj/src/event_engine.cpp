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

#include "ethsim/event_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ethsim/error.hpp"
#include "ethsim/rng.hpp"

namespace ethsim {

namespace {

double weight(const DensityState& rho, const Operator& p) {
  return std::max(0.0, rho.expectation(p).real());
}

Operator hermitized(const Matrix& m) { return Operator(0.5 * (m + m.adjoint())); }

// On all of M_d the centralizer of rho is the commutant of its clustered
// eigenprojections pi_j, and its center is spanned by the pi_j themselves.
// Then c_j = Tr(P pi_j X pi_j) / Tr(P pi_j) = Tr(pi_j X) / Tr(pi_j) on every
// block of nonzero weight, which is also the trace fallback on zero-weight
// blocks.  This avoids materializing the d^2-dimensional algebra.
class FullAlgebraCenter {
 public:
  explicit FullAlgebraCenter(const DensityState& rho)
      : sd_(spectral_decompose(rho.matrix(), kDegeneracyTol)) {}

  Operator expect(const Operator& x) const {
    Matrix out = Matrix::Zero(x.matrix().rows(), x.matrix().cols());
    for (const auto& pi : sd_.projections) {
      const Matrix& z = pi.matrix();
      const Complex c = (z.transpose().cwiseProduct(x.matrix())).sum() / z.trace().real();
      out += c * z;
    }
    return Operator(std::move(out));
  }

 private:
  SpectralDecomposition sd_;
};

DetectionVerdict make_verdict(const DensityState& rho, const PartitionOfUnity& partition,
                              double safety, double distance) {
  DetectionVerdict v{.happened = false,
                     .admissible = false,
                     .time = 0.0,
                     .step = 0,
                     .family = 0,
                     .distance = distance,
                     .threshold = 0.0,
                     .gap = born_weight_gap(rho, partition),
                     .partition = partition};
  try {
    const double delta = admissible_threshold(rho, partition, safety);
    v.admissible = true;
    v.threshold = delta / double(partition.size());
    v.happened = distance <= v.threshold;
  } catch (const InadmissibleThreshold&) {
  }
  return v;
}

void check_safety(double safety) {
  if (!(safety > 0.0 && safety < 1.0)) {
    throw InvalidArgument("safety factor must lie in (0, 1), got " + format_label(safety));
  }
}

// The conditional expectation used at one step: either the closed form on
// M_d or a full analysis against the restriction algebra.
class StepExpectation {
 public:
  StepExpectation(const HeisenbergFrame& frame, const DensityState& rho, std::size_t step) {
    const auto& r = frame.restriction_at(step);
    if (r) {
      analysis_.emplace(*r, rho);
    } else {
      full_.emplace(rho);
    }
  }

  double distance(const PartitionOfUnity& partition) const {
    double d = 0.0;
    for (const auto& p : partition.projections()) {
      if (analysis_) analysis_->require_in_ambient(p, "detect_event");
      const Operator e = analysis_ ? analysis_->expect_onto_center(p).value : full_->expect(p);
      d = std::max(d, operator_norm(e - p));
    }
    return d;
  }

 private:
  std::optional<StateAnalysis> analysis_;
  std::optional<FullAlgebraCenter> full_;
};

DetectionVerdict verdict_at(const HeisenbergFrame& frame, const DensityState& rho,
                            const StepExpectation& ex, std::size_t step, std::size_t family,
                            double safety) {
  const PartitionOfUnity& partition = frame.partitions_at(step).at(family);
  DetectionVerdict v = make_verdict(rho, partition, safety, ex.distance(partition));
  v.time = frame.time(step);
  v.step = step;
  v.family = family;
  return v;
}

std::size_t sample_index(const std::vector<double>& p, CounterRng& rng) {
  double total = 0.0;
  for (double x : p) total += x;
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] > 0.0) return i;
  }
  throw NumericalError("Born sampling: all outcome weights vanish");
}

}  // namespace

HeisenbergFrame::HeisenbergFrame(std::size_t dim, std::vector<FrameStep> steps, double tol)
    : dim_(dim), steps_(std::move(steps)) {
  if (dim_ == 0) throw InvalidArgument("HeisenbergFrame: dimension must be positive");
  if (steps_.empty()) throw InvalidArgument("HeisenbergFrame: at least one time step is required");
  const Matrix id = Matrix::Identity(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    const FrameStep& s = steps_[k];
    const std::string where = "HeisenbergFrame: step " + std::to_string(k);
    if (!std::isfinite(s.time)) throw InvalidArgument(where + ": time is not finite");
    if (k > 0 && !(s.time > steps_[k - 1].time)) {
      throw InvalidArgument(where + ": times must be strictly increasing");
    }
    if (s.propagator.dim() != dim_) throw InvalidArgument(where + ": propagator dimension mismatch");
    if (!s.propagator.is_unitary(tol)) throw InvalidArgument(where + ": propagator is not unitary");
    if (k == 0 && (s.propagator.matrix() - id).norm() > tol * std::sqrt(double(dim_))) {
      throw InvalidArgument(where + ": U(t_0, t_0) must be the identity");
    }
    for (const auto& p : s.partitions) {
      if (p.dim() != dim_) throw InvalidArgument(where + ": partition dimension mismatch");
    }
    if (s.restriction) {
      if (s.restriction->dim() != dim_) {
        throw InvalidArgument(where + ": restriction algebra dimension mismatch");
      }
      if (!s.restriction->contains_identity()) {
        throw InvalidArgument(where + ": restriction algebra must contain the identity");
      }
    }
    // Accessible algebras may only shrink: E(t_k) must sit inside E(t_{k-1}).
    if (k > 0) {
      const auto& prev = steps_[k - 1].restriction;
      if (prev && !s.restriction) {
        throw InvalidArgument(where + ": restriction grows back to the full algebra");
      }
      if (prev && s.restriction) {
        for (const auto& b : s.restriction->basis()) {
          if (prev->residual(b) > kSpanTol) {
            throw InvalidArgument(where + ": restriction algebra is not contained in the previous one");
          }
        }
      }
    }
  }
  evolved_.reserve(steps_.size());
  for (const auto& s : steps_) {
    std::vector<PartitionOfUnity> ev;
    ev.reserve(s.partitions.size());
    for (const auto& p : s.partitions) ev.push_back(p.conjugated(s.propagator, tol));
    evolved_.push_back(std::move(ev));
  }
}

std::vector<std::size_t> HeisenbergFrame::observable_steps() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    if (!steps_[k].partitions.empty()) out.push_back(k);
  }
  return out;
}

std::optional<std::size_t> HeisenbergFrame::step_of_time(double t) const {
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    if (steps_[k].time == t) return k;
  }
  return std::nullopt;
}

HeisenbergFrame HeisenbergFrame::truncated(std::size_t count) const {
  if (count == 0 || count > steps_.size()) {
    throw InvalidArgument("HeisenbergFrame::truncated: count out of range");
  }
  return HeisenbergFrame(dim_, std::vector<FrameStep>(steps_.begin(), steps_.begin() + long(count)));
}

double born_weight_gap(const DensityState& rho, const PartitionOfUnity& partition) {
  const auto& ps = partition.projections();
  if (ps.size() < 2) return 0.0;
  std::vector<double> w;
  w.reserve(ps.size());
  for (const auto& p : ps) w.push_back(rho.expectation(p).real());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = i + 1; j < w.size(); ++j) gap = std::min(gap, std::abs(w[i] - w[j]));
  }
  return gap;
}

double admissible_threshold(const DensityState& rho, const PartitionOfUnity& partition,
                            double safety) {
  check_safety(safety);
  if (partition.dim() != rho.dim()) {
    throw InvalidArgument("admissible_threshold: dimension mismatch");
  }
  if (partition.size() < 2) {
    throw InadmissibleThreshold("no admissible threshold: partition has a single outcome");
  }
  const double gap = born_weight_gap(rho, partition);
  if (gap <= kDefaultTol) {
    throw InadmissibleThreshold("no admissible threshold: two outcomes have equal Born weight");
  }
  return safety * gap;
}

DetectionVerdict detect_event(const StateAnalysis& analysis, const PartitionOfUnity& partition,
                              double safety) {
  check_safety(safety);
  double d = 0.0;
  for (const auto& p : partition.projections()) {
    analysis.require_in_ambient(p, "detect_event");
    d = std::max(d, operator_norm(analysis.expect_onto_center(p).value - p));
  }
  return make_verdict(analysis.state(), partition, safety, d);
}

DetectionVerdict detect_event(const HeisenbergFrame& frame, const DensityState& rho,
                              std::size_t step, std::size_t family, double safety) {
  check_safety(safety);
  if (rho.dim() != frame.dim()) throw InvalidArgument("detect_event: state dimension mismatch");
  if (step >= frame.size()) throw InvalidArgument("detect_event: step out of range");
  if (family >= frame.partitions_at(step).size()) {
    throw InvalidArgument("detect_event: no candidate family " + std::to_string(family) +
                          " at step " + std::to_string(step));
  }
  const StepExpectation ex(frame, rho, step);
  return verdict_at(frame, rho, ex, step, family, safety);
}

StepScan scan_step(const HeisenbergFrame& frame, const DensityState& rho, std::size_t step,
                   double safety) {
  check_safety(safety);
  if (rho.dim() != frame.dim()) throw InvalidArgument("scan_step: state dimension mismatch");
  StepScan scan;
  scan.time = frame.time(step);
  scan.step = step;
  const auto& families = frame.partitions_at(step);
  if (families.empty()) return scan;
  const StepExpectation ex(frame, rho, step);
  std::vector<std::size_t> fired;
  for (std::size_t f = 0; f < families.size(); ++f) {
    scan.candidates.push_back(verdict_at(frame, rho, ex, step, f, safety));
    if (scan.candidates.back().happened) fired.push_back(f);
  }
  if (fired.empty()) return scan;
  std::stable_sort(fired.begin(), fired.end(), [&](std::size_t a, std::size_t b) {
    return scan.candidates[a].distance < scan.candidates[b].distance;
  });
  scan.selected = fired.front();
  if (fired.size() > 1) {
    scan.ambiguous = true;
    scan.margin = scan.candidates[fired[1]].distance - scan.candidates[fired[0]].distance;
  }
  return scan;
}

EarliestEvent earliest_event(const HeisenbergFrame& frame, const DensityState& rho,
                             double safety) {
  EarliestEvent out;
  for (std::size_t k = 0; k < frame.size(); ++k) out.scans.push_back(scan_step(frame, rho, k, safety));
  for (std::size_t k = 0; k < out.scans.size(); ++k) {
    if (out.scans[k].selected) {
      out.t_min = k;
      break;
    }
  }
  if (!out.t_min) return out;
  std::size_t end = *out.t_min;
  while (end + 1 < out.scans.size() && out.scans[end + 1].selected) ++end;
  out.run_end = end;
  auto best_distance = [&](std::size_t k) {
    return out.scans[k].candidates[*out.scans[k].selected].distance;
  };
  std::size_t best = *out.t_min;
  for (std::size_t k = best + 1; k <= end; ++k) {
    if (best_distance(k) < best_distance(best)) best = k;
  }
  out.t_star = best;
  return out;
}

std::vector<std::pair<std::string, double>> born_probabilities(const DensityState& rho,
                                                               const PartitionOfUnity& partition) {
  if (partition.dim() != rho.dim()) throw InvalidArgument("born_probabilities: dimension mismatch");
  std::vector<std::pair<std::string, double>> out;
  out.reserve(partition.size());
  for (std::size_t i = 0; i < partition.size(); ++i) {
    out.emplace_back(partition.labels()[i], weight(rho, partition.projections()[i]));
  }
  return out;
}

DensityState collapse(const DensityState& rho, const Operator& projection, double p) {
  if (projection.dim() != rho.dim()) throw InvalidArgument("collapse: dimension mismatch");
  if (!(p > kDefaultTol)) {
    throw ZeroProbabilityBranch("collapse: branch probability " + format_label(p) +
                                " is not positive");
  }
  const double expected = rho.expectation(projection).real();
  if (std::abs(expected - p) > 1e-9 * std::max(1.0, std::abs(expected))) {
    throw InvalidArgument("collapse: given probability " + format_label(p) +
                          " differs from rho(Pi) = " + format_label(expected));
  }
  const Matrix& pi = projection.matrix();
  return DensityState(hermitized(pi * rho.matrix().matrix() * pi / p), detail::TrustedState{});
}

DensityState collapse(const DensityState& rho, const Operator& projection) {
  return collapse(rho, projection, rho.expectation(projection).real());
}

DensityState unrecorded_update(const DensityState& rho, const PartitionOfUnity& partition) {
  if (partition.dim() != rho.dim()) throw InvalidArgument("unrecorded_update: dimension mismatch");
  const Matrix& p = rho.matrix().matrix();
  Matrix out = Matrix::Zero(p.rows(), p.cols());
  for (const auto& pi : partition.projections()) out += pi.matrix() * p * pi.matrix();
  return DensityState(hermitized(out), detail::TrustedState{});
}

Trajectory run_trajectory(const HeisenbergFrame& frame, const DensityState& rho0,
                          const TrajectoryOptions& options) {
  check_safety(options.safety);
  if (rho0.dim() != frame.dim()) throw InvalidArgument("run_trajectory: state dimension mismatch");
  CounterRng rng(options.seed, options.stream);
  Trajectory traj{{}, rho0, {}, {}};
  for (std::size_t k : frame.observable_steps()) {
    BranchEntry entry;
    entry.step = k;
    if (options.mode == DetectionMode::kCriterion) {
      StepScan scan = scan_step(frame, traj.final_state, k, options.safety);
      const bool fired = scan.selected.has_value();
      if (fired) {
        const auto& v = scan.candidates[*scan.selected];
        entry.family = *scan.selected;
        entry.distance = v.distance;
        entry.threshold = v.threshold;
        entry.ambiguous = scan.ambiguous;
      }
      traj.scans.push_back(std::move(scan));
      if (!fired) continue;
    }
    const PartitionOfUnity& partition = frame.partitions_at(k)[entry.family];
    std::vector<double> p;
    p.reserve(partition.size());
    for (const auto& pi : partition.projections()) p.push_back(weight(traj.final_state, pi));
    const std::size_t i = sample_index(p, rng);
    const bool recorded = options.record.records(k);
    entry.event = EventRecord{frame.time(k), partition.labels()[i], p[i], recorded};
    if (recorded) {
      traj.final_state = collapse(traj.final_state, partition.projections()[i], p[i]);
      traj.history.push_back(entry.event);
    } else {
      traj.final_state = unrecorded_update(traj.final_state, partition);
    }
    traj.branch_log.push_back(std::move(entry));
  }
  return traj;
}

}  // namespace ethsim
