// tests/gradcheck.h

// Copyright 2026 The lidwb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LIDWB_TESTS_GRADCHECK_H_
#define LIDWB_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "lidwb/nn/tensor.h"
#include "lidwb/util/rng.h"

namespace lidwb::test {

// Central finite differences (step h) against the tape gradient.
// Per coordinate: |a - n| / max(|a|, |n|, floor). At most max_coords
// coordinates per input are probed, chosen at random.
struct GradCheckResult {
  double max_rel_error = 0.0;
  size_t coords = 0;
  size_t skipped = 0;  // coordinates sitting on a kink (see skip_kinks)
};

inline GradCheckResult GradCheck(const std::function<nn::Tensor()>& loss_fn,
                                 std::vector<nn::Tensor> inputs, size_t max_coords = 64,
                                 uint64_t seed = 1, double h = 1e-4, double floor = 1e-6,
                                 bool skip_kinks = false) {
  for (auto& t : inputs) t.ZeroGrad();
  nn::Tensor loss = loss_fn();
  loss.Backward();
  std::vector<std::vector<double>> analytic;
  for (auto& t : inputs) {
    analytic.push_back(t.has_grad() ? t.grad() : std::vector<double>(t.size(), 0.0));
  }
  Rng rng(seed);
  GradCheckResult r;
  nn::NoGradGuard guard;
  auto central = [&](nn::Tensor& t, size_t i, double step) {
    const double keep = t.data()[i];
    t.data()[i] = keep + step;
    const double up = loss_fn().item();
    t.data()[i] = keep - step;
    const double down = loss_fn().item();
    t.data()[i] = keep;
    return (up - down) / (2.0 * step);
  };
  for (size_t k = 0; k < inputs.size(); ++k) {
    nn::Tensor& t = inputs[k];
    std::vector<size_t> idx(t.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(idx.size(), max_coords));
    for (size_t i : idx) {
      const double num = central(t, i, h);
      const double a = analytic[k][i];
      if (skip_kinks) {
        // A ReLU switching inside [x-h, x+h] makes the estimate depend on h.
        const double fine = central(t, i, h / 4.0);
        if (std::fabs(num - fine) > 1e-5 * std::max({std::fabs(num), std::fabs(fine), floor})) {
          ++r.skipped;
          continue;
        }
      }
      const double rel = std::fabs(a - num) / std::max({std::fabs(a), std::fabs(num), floor});
      r.max_rel_error = std::max(r.max_rel_error, rel);
      ++r.coords;
    }
  }
  return r;
}

}  // namespace lidwb::test

#endif  // LIDWB_TESTS_GRADCHECK_H_
