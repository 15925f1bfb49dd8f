#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace scenelab {

// Every parallel kernel in this project also runs serially; the serial path
// is the reference implementation the tests compare against. Workers write
// disjoint output slots and all reductions happen afterwards in fixed serial
// order, so both modes produce bit-identical results.
enum class ExecMode {
    serial,
    openmp,
};

inline const char* exec_mode_name(ExecMode m) { return m == ExecMode::serial ? "serial" : "openmp"; }

// Runs fn(i) for i in [0, n). Exceptions thrown by workers are captured and
// rethrown on the calling thread (the first one wins).
template <class Fn>
void parallel_for(std::size_t n, ExecMode mode, Fn&& fn) {
    if (mode == ExecMode::serial || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

} // namespace scenelab
