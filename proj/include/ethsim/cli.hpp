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

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ethsim::cli {

enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 1,
  kInvariantFailure = 2,
  kNoEvent = 3,
};

/// Runs `ethsim <subcommand> ...`; `args` excludes the program name.
/// Results go to --out (or the config's output path) when given, else to
/// `out`; diagnostics go to `err`.  Nothing is written to the output file
/// unless the command completes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ethsim::cli
