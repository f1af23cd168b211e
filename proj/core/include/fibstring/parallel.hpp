// Copyright 2026 The fibstring Authors
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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace fibstring {

/// Worker count: set_worker_count() override, else FIBSTRING_THREADS, else the
/// hardware concurrency.
int worker_count();
/// 0 restores the environment/hardware default.
void set_worker_count(int n);

/// Runs body(i) for i in [0, n_tasks). Every task runs on exactly one worker;
/// callers that reduce must store per-task results and combine them in task
/// order, which keeps results independent of the worker count.
void parallel_for(std::size_t n_tasks, const std::function<void(std::size_t)>& body);

/// Independent generator for (seed, stream), e.g. one stream per RM instance.
std::mt19937_64 rng_stream(std::uint64_t seed, std::uint64_t stream);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0;
  double comp_ = 0;
};

double compensated_sum(const std::vector<double>& xs);

}  // namespace fibstring
