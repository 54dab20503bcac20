// include/lidwb/util/rng.h

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

#ifndef LIDWB_UTIL_RNG_H_
#define LIDWB_UTIL_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace lidwb {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to combine seeds.
uint64_t MixSeed(uint64_t a, uint64_t b);

/// FNV-1a. Stable across platforms, unlike std::hash.
uint64_t HashString(std::string_view s);

/// Seed for one work item, independent of the order items are processed in.
uint64_t DeriveSeed(uint64_t base, std::initializer_list<std::string_view> parts);

double Uniform(Rng& rng, double lo, double hi);
/// Inclusive on both ends.
int UniformInt(Rng& rng, int lo, int hi);
double Gaussian(Rng& rng);
double BetaSample(Rng& rng, double a, double b);

}  // namespace lidwb

#endif  // LIDWB_UTIL_RNG_H_
