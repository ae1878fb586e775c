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

#include "nmrpulse/adam.hpp"

#include <cmath>

#include "nmrpulse/linalg.hpp"

namespace nmrpulse {

void AdamParams::validate() const {
  if (!(lr > 0.0)) throw NmrError("adam: lr must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw NmrError("adam: beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw NmrError("adam: beta2 must lie in (0, 1)");
  if (!(eps > 0.0)) throw NmrError("adam: eps must be positive");
}

void adam_update(AdamState& state, std::span<const double> grads, std::span<double> params,
                 const AdamParams& hp, AdamDirection dir) {
  const std::size_t n = params.size();
  if (grads.size() != n) throw NmrError("adam: gradient/parameter size mismatch");
  if (state.m.size() != n) {
    if (state.t != 0) throw NmrError("adam: state size does not match parameters");
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
  const double sign = dir == AdamDirection::Ascend ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double g = grads[k];
    state.m[k] = hp.beta1 * state.m[k] + (1.0 - hp.beta1) * g;
    state.v[k] = hp.beta2 * state.v[k] + (1.0 - hp.beta2) * g * g;
    const double mhat = state.m[k] / c1;
    const double vhat = state.v[k] / c2;
    params[k] += sign * hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
  }
}

}  // namespace nmrpulse
