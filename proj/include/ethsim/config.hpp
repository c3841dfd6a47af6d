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

// Experiment configuration files.  See README.md for the full schema.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ethsim/event_engine.hpp"
#include "ethsim/mesoscopic.hpp"
#include "ethsim/serialize.hpp"

namespace ethsim {

inline constexpr int kConfigSchema = 1;

struct FrameModel {
  HeisenbergFrame frame;
  DensityState initial;
};

struct RunSection {
  double safety = kDefaultSafety;
  std::uint64_t seed = 0;
  std::size_t trajectories = 1;
  RecordPolicy record = RecordPolicy::always();
  DetectionMode detection = DetectionMode::kCriterion;
  /// Per-trajectory detail in trajectory output; default: trajectories <= 100.
  std::optional<bool> keep_trajectories;
  std::optional<std::vector<std::string>> protocol;
  std::optional<std::size_t> consistency_length;

  std::vector<std::size_t> n_values{50, 100, 200, 500};
  std::size_t count = 0;
  BandSchedule classification{1.0 / 3.0, 1.0};
  BandSchedule sanov{0.45, 1.0};
  std::vector<std::size_t> sanov_n_values{50, 100, 200, 400};
  std::size_t purification_length = 200;
  std::size_t purification_count = 0;
};

struct OutputSection {
  std::optional<std::string> path;
  std::string format = "json";
};

struct ExperimentConfig {
  int schema = kConfigSchema;
  std::variant<FrameModel, DeFinettiModel> model;
  RunSection run;
  OutputSection output;
};

/// Parses and validates a configuration document.  Throws SchemaError with
/// a JSON pointer (or a line and column for syntax errors) on failure.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace ethsim
