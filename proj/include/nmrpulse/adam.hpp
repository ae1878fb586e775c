// Copyright 2026 The nmrpulse Authors
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

#include <cstdint>
#include <span>
#include <vector>

namespace nmrpulse {

struct AdamParams {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  /// Throws NmrError unless 0 < beta1, beta2 < 1, eps > 0 and lr > 0.
  void validate() const;
  friend bool operator==(const AdamParams&, const AdamParams&) = default;
};

enum class AdamDirection { Ascend, Descend };

/// First/second moment estimates for one optimization run.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected ADAM update of `params` in place.
void adam_update(AdamState& state, std::span<const double> grads, std::span<double> params,
                 const AdamParams& hp, AdamDirection dir);

}  // namespace nmrpulse
