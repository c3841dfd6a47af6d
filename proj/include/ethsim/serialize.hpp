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

// JSON forms of the library types.  An operator is
//   {"dim": n, "re": [[...], ...], "im": [[...], ...]}
// with row-major nested arrays; "im" may be omitted on input.

#pragma once

#include <string>

#include "json.hpp"

#include "ethsim/algebra.hpp"
#include "ethsim/error.hpp"
#include "ethsim/event_engine.hpp"
#include "ethsim/operator.hpp"
#include "ethsim/state_analysis.hpp"

namespace ethsim {

using Json = nlohmann::ordered_json;

/// Malformed JSON input; `path()` is a JSON pointer to the offending value.
class SchemaError : public InvalidArgument {
 public:
  SchemaError(const std::string& path, const std::string& message);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

Json to_json(const Operator& a);
/// `path` is used in error messages only.
Operator operator_from_json(const Json& j, const std::string& path = "");

Json to_json(const FiniteAlgebra& a);
Json to_json(const SpectralDecomposition& sd);
Json to_json(const CentralizerReport& r);
Json to_json(const PartitionOfUnity& p);
Json to_json(const DetectionVerdict& v);
Json to_json(const StepScan& s);
Json to_json(const EventRecord& e);
Json to_json(const Trajectory& t);

}  // namespace ethsim
