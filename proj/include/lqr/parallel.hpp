// OpenMP loop that carries the first exception out of the parallel region.
#pragma once
#include <exception>

namespace lqr {

template <class F>
void parallel_for(long n, int threads, F&& body) {
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
  for (long i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace lqr
