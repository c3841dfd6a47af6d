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

#include <stdexcept>
#include <string>

namespace ethsim {

/// Malformed input: wrong dimensions, non-Hermitian where Hermitian is
/// required, invalid labels, and so on.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical invariant could not be established (closure did not converge,
/// a decomposition failed its self-check).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operator was required to lie in an algebra but does not.
class OutsideAlgebra : public InvalidArgument {
 public:
  OutsideAlgebra(const std::string& what, double residual)
      : InvalidArgument(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Conditioning on an outcome whose probability is (numerically) zero.
class ZeroProbabilityBranch : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The Born weights of a partition are degenerate, so no positive detection
/// threshold exists.
class InadmissibleThreshold : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace ethsim
