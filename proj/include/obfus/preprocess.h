// Copyright 2026 The Obfus Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef OBFUS_PREPROCESS_H_
#define OBFUS_PREPROCESS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "obfus/core_model.h"

namespace obfus {

// One row of a grouped table: values start..end, or start and above when end
// is empty (the open top class).
struct GroupedClass {
  int start = 0;
  std::optional<int> end;
  int64_t count = 0;
};

// Open class start + ceil(3 * poisson_mean).
int DefaultSplitCap(std::span<const GroupedClass> groups, double poisson_mean);

// Per-value histogram from grouped counts. Each group's count is shared over
// its values in proportion to the Poisson(poisson_mean) pmf restricted to
// the group (the open class uses [start, cap]), rounded by largest remainder
// so that every group total is kept exactly.
Histogram SplitGrouped(std::span<const GroupedClass> groups,
                       double poisson_mean, std::optional<int> cap);

}  // namespace obfus

#endif  // OBFUS_PREPROCESS_H_
