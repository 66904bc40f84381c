#pragma once

#include <cstddef>
#include <exception>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ksep {

/// Execution policy for the data-parallel kernels. Every kernel writes its
/// results into index-addressed slots, so serial and openmp runs produce
/// bitwise-identical output; the serial path is the reference the tests
/// compare against.
enum class Exec { serial, openmp };

namespace detail {

class ExceptionCollector {
  public:
    void capture(std::ptrdiff_t index) {
#ifdef _OPENMP
#pragma omp critical(ksep_exception_collector)
#endif
        {
            if (!ptr_ || index < index_) {
                ptr_ = std::current_exception();
                index_ = index;
            }
        }
    }

    void rethrow_if_any() const {
        if (ptr_) std::rethrow_exception(ptr_);
    }

  private:
    std::exception_ptr ptr_;
    std::ptrdiff_t index_ = 0;
};

}  // namespace detail

/// Run fn(i) for i in [0, n). With Exec::openmp the iterations are distributed
/// over threads; an exception thrown by any iteration is re-thrown (lowest
/// index wins) after the loop joins.
template <class F>
void for_index(Exec exec, std::ptrdiff_t n, F&& fn) {
    if (n <= 0) return;
    if (exec == Exec::serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
        return;
    }
    detail::ExceptionCollector errors;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
            errors.capture(i);
        }
    }
    errors.rethrow_if_any();
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace ksep
