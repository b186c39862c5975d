#pragma once

#include <cstddef>
#include <functional>

namespace rfsd {

// Global worker count used by every parallel section. Results never depend on
// it: parallel loops only write per-index slots and reductions run serially.
void set_num_threads(int n);
int num_threads();

// Runs body(i) for i in [0, n). Nested calls from inside a worker run inline.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rfsd
