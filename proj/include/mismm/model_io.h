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

#ifndef MISMM_MODEL_IO_H_
#define MISMM_MODEL_IO_H_

#include <filesystem>
#include <iosfwd>

#include "mismm/eval.h"

namespace mismm {

// JSON model files. Doubles are written in shortest round-trip form, so a
// reloaded model scores bitwise identically.
void WriteModel(const TrainedModel& model, std::ostream& out);
TrainedModel ReadModel(std::istream& in);

void SaveModel(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel LoadModel(const std::filesystem::path& path);

}  // namespace mismm

#endif  // MISMM_MODEL_IO_H_
