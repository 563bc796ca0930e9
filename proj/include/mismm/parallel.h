// Copyright 2026 The mismm Authors. All Rights Reserved.
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

#ifndef MISMM_PARALLEL_H_
#define MISMM_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace mismm {

// Caps the number of worker threads used by every parallel section.
// Values < 1 reset to the number of available cores.
void SetMaxThreads(int threads);
int MaxThreads();

// Runs body(i) for i in [0, n). Every index writes its own output slot, so
// results do not depend on the schedule. Nested calls run serially.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mismm

#endif  // MISMM_PARALLEL_H_
