#include "mfres/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>

namespace mfres::parallel {

namespace {
int g_jobs = 0;

int detect_jobs() {
    if (const char* env = std::getenv("MFRES_JOBS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return omp_get_max_threads();
}
}  // namespace

int jobs() {
    if (g_jobs > 0) return g_jobs;
    return detect_jobs();
}

void set_jobs(int n) { g_jobs = n > 0 ? n : 0; }

void for_each_index(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
    if (n <= 0) return;
    std::exception_ptr first_error;
    std::int64_t first_error_index = -1;
    std::mutex error_mutex;

    const int nthreads = jobs();
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (first_error_index < 0 || i < first_error_index) {
                first_error = std::current_exception();
                first_error_index = i;
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mfres::parallel
