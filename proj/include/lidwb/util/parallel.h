// include/lidwb/util/parallel.h

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

#ifndef LIDWB_UTIL_PARALLEL_H_
#define LIDWB_UTIL_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace lidwb {

/// Worker count: LIDWB_THREADS when set (>= 1), else hardware concurrency.
int WorkerCount();

/// Runs fn(i) for i in [0, n). Items must not share mutable state; the first
/// exception thrown by any item is rethrown after all workers join.
void ParallelFor(size_t n, const std::function<void(size_t)>& fn);

}  // namespace lidwb

#endif  // LIDWB_UTIL_PARALLEL_H_
