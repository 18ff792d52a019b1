#pragma once

#include <cstdint>
#include <functional>

namespace mfres::parallel {

// Worker count used for task-level parallel maps. Resolution order:
// explicit set_jobs() (CLI --jobs), MFRES_JOBS env var, hardware threads.
int jobs();
void set_jobs(int n);

// Parallel map over [0, n). Each task must be independent; outputs are
// written to per-task slots so parallel and serial execution produce
// identical results. Exceptions are captured and rethrown (first index wins).
void for_each_index(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace mfres::parallel
