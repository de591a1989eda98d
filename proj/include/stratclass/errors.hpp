// Copyright 2026 The stratclass Authors.
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

namespace stratclass {

// Invalid or inconsistent experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A brute-force routine was asked to run beyond its guarded scale (CLI exit code 3).
class ScaleGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The interaction protocol was violated, e.g. a reward was withheld when the
// feedback model requires one.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A threshold policy with no usable direction.
class PolicyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A Monte-Carlo estimate whose conditioning event was hit too rarely.
class InsufficientSamplesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stratclass
