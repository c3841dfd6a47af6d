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

#include "ethsim/histories.hpp"

#include <algorithm>
#include <cmath>

#include "ethsim/error.hpp"

namespace ethsim {

namespace {

// Pi S Pi with S kept at unit trace; the discarded scale is accumulated in
// log_scale so long protocols do not underflow.
struct Accumulator {
  Matrix s;
  double log_scale = 0.0;
  bool vanished = false;
  double residue = 0.0;  // trace at the moment the branch vanished

  double value() const { return vanished ? residue : std::exp(log_scale); }

  Accumulator then(const Matrix& pi) const {
    Accumulator next{pi * s * pi, log_scale, vanished, residue};
    if (vanished) return next;
    const double t = next.s.trace().real();
    if (!(t > 0.0) || !std::isfinite(t)) {
      next.vanished = true;
      next.residue = t * std::exp(log_scale);
      return next;
    }
    next.s /= t;
    next.log_scale += std::log(t);
    return next;
  }
};

std::vector<std::size_t> first_observable(const HeisenbergFrame& frame, std::size_t n) {
  std::vector<std::size_t> obs = frame.observable_steps();
  if (obs.size() < n) {
    throw InvalidArgument("protocol length " + std::to_string(n) + " exceeds the " +
                          std::to_string(obs.size()) + " observable steps of the frame");
  }
  obs.resize(n);
  return obs;
}

}  // namespace

MeasurementProtocol::MeasurementProtocol(std::vector<ProtocolEntry> entries)
    : entries_(std::move(entries)) {
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].step <= entries_[i - 1].step) {
      throw InvalidArgument("MeasurementProtocol: steps must be strictly increasing");
    }
  }
}

MeasurementProtocol MeasurementProtocol::from_labels(const HeisenbergFrame& frame,
                                                     const std::vector<std::string>& labels) {
  const auto steps = first_observable(frame, labels.size());
  std::vector<ProtocolEntry> e;
  e.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) e.push_back({steps[i], labels[i], 0});
  MeasurementProtocol p(std::move(e));
  p.validate(frame);
  return p;
}

std::vector<std::string> MeasurementProtocol::labels() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.outcome);
  return out;
}

void MeasurementProtocol::validate(const HeisenbergFrame& frame) const {
  for (const auto& e : entries_) {
    if (e.step >= frame.size()) {
      throw InvalidArgument("MeasurementProtocol: step " + std::to_string(e.step) +
                            " is outside the frame");
    }
    const auto& fams = frame.partitions_at(e.step);
    if (e.family >= fams.size()) {
      throw InvalidArgument("MeasurementProtocol: no family " + std::to_string(e.family) +
                            " at step " + std::to_string(e.step));
    }
    if (!fams[e.family].index_of(e.outcome)) {
      throw InvalidArgument("MeasurementProtocol: unknown outcome label '" + e.outcome +
                            "' at step " + std::to_string(e.step));
    }
  }
}

LswValue lsw_evaluate(const HeisenbergFrame& frame, const DensityState& rho0,
                      const MeasurementProtocol& protocol) {
  if (rho0.dim() != frame.dim()) throw InvalidArgument("lsw_probability: state dimension mismatch");
  protocol.validate(frame);
  Accumulator acc{rho0.matrix().matrix()};
  for (const auto& e : protocol.entries()) {
    acc = acc.then(frame.partitions_at(e.step)[e.family].projection(e.outcome).matrix());
    if (acc.vanished) break;
  }
  LswValue v;
  v.raw = acc.value();
  v.probability = std::clamp(v.raw, 0.0, 1.0);
  v.clamped_by = std::abs(v.raw - v.probability);
  return v;
}

double lsw_probability(const HeisenbergFrame& frame, const DensityState& rho0,
                       const MeasurementProtocol& protocol) {
  return lsw_evaluate(frame, rho0, protocol).probability;
}

std::uint64_t protocol_count(const HeisenbergFrame& frame, std::size_t n) {
  std::uint64_t count = 1;
  for (std::size_t k : first_observable(frame, n)) {
    const std::uint64_t m = frame.partitions_at(k).front().size();
    if (count > UINT64_MAX / m) return UINT64_MAX;
    count *= m;
  }
  return count;
}

std::vector<MeasurementProtocol> enumerate_protocols(const HeisenbergFrame& frame, std::size_t n) {
  const auto steps = first_observable(frame, n);
  std::vector<MeasurementProtocol> out;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    std::vector<ProtocolEntry> e;
    e.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      e.push_back({steps[i], frame.partitions_at(steps[i]).front().labels()[idx[i]], 0});
    }
    out.emplace_back(std::move(e));
    // Odometer increment, last position fastest.
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < frame.partitions_at(steps[pos]).front().size()) break;
      idx[pos] = 0;
      if (pos == 0) return out;
    }
    if (n == 0) return out;
  }
}

ConsistencyReport consistency_check(const HeisenbergFrame& frame, const DensityState& rho0,
                                    std::size_t n, std::uint64_t max_leaves) {
  if (rho0.dim() != frame.dim()) throw InvalidArgument("consistency_check: state dimension mismatch");
  const auto steps = first_observable(frame, n);
  ConsistencyReport r;
  r.length = n;
  r.leaves = protocol_count(frame, n);
  if (r.leaves > max_leaves) {
    throw InvalidArgument("consistency_check: outcome tree has " + std::to_string(r.leaves) +
                          " leaves, more than the limit " + std::to_string(max_leaves));
  }
  double total = 0.0;
  // Depth-first over prefixes; each node compares its value with the sum over
  // its children.
  auto visit = [&](auto&& self, const Accumulator& node, std::size_t depth) -> void {
    const double v = node.value();
    r.max_clamp = std::max(r.max_clamp, std::abs(v - std::clamp(v, 0.0, 1.0)));
    if (depth == n) {
      total += std::clamp(v, 0.0, 1.0);
      return;
    }
    double children = 0.0;
    for (const auto& pi : frame.partitions_at(steps[depth]).front().projections()) {
      const Accumulator child = node.then(pi.matrix());
      children += child.value();
      self(self, child, depth + 1);
    }
    r.max_prefix_residual = std::max(r.max_prefix_residual, std::abs(children - v));
  };
  visit(visit, Accumulator{rho0.matrix().matrix()}, 0);
  r.normalization_residual = std::abs(total - 1.0);
  return r;
}

SamplerComparison sampler_vs_measure(const HeisenbergFrame& frame, const DensityState& rho0,
                                     std::size_t n, std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw InvalidArgument("sampler_vs_measure: need at least one sample");
  const auto steps = first_observable(frame, n);
  const auto protocols = enumerate_protocols(frame, n);
  SamplerComparison out;
  out.samples = samples;
  for (const auto& p : protocols) {
    out.protocols.push_back(p.labels());
    out.exact.push_back(lsw_probability(frame, rho0, p));
  }
  std::vector<std::uint64_t> hist(protocols.size(), 0);
  if (n == 0) {
    hist[0] = samples;
  } else {
    const HeisenbergFrame head = frame.truncated(steps.back() + 1);
    // Mixed-radix index of an outcome sequence, last position fastest, to
    // match the enumeration order.
    std::vector<std::uint64_t> radix(n, 1);
    for (std::size_t i = n - 1; i > 0; --i) {
      radix[i - 1] = radix[i] * head.partitions_at(steps[i]).front().size();
    }
    TrajectoryOptions opt;
    opt.mode = DetectionMode::kForced;
    opt.record = RecordPolicy::always();
    opt.seed = seed;
    for (std::uint64_t s = 0; s < samples; ++s) {
      opt.stream = s;
      const Trajectory t = run_trajectory(head, rho0, opt);
      std::uint64_t index = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& fam = head.partitions_at(steps[i]).front();
        index += radix[i] * *fam.index_of(t.branch_log[i].event.outcome);
      }
      ++hist[index];
    }
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < protocols.size(); ++i) {
    out.empirical.push_back(double(hist[i]) / double(samples));
    tv += std::abs(out.empirical[i] - out.exact[i]);
  }
  out.total_variation = 0.5 * tv;
  return out;
}

}  // namespace ethsim
