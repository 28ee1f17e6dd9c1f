#pragma once

#include <exception>
#include <vector>

namespace algebroid::kernels {

template <class T>
std::vector<T> map_indices(std::size_t n, const std::function<T(std::size_t)>& image, Exec exec) {
  std::vector<T> out(n);
  if (exec == Exec::serial || n < 2) {
    for (std::size_t j = 0; j < n; ++j) out[j] = image(j);
    return out;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
  for (long long j = 0; j < static_cast<long long>(n); ++j) {
    try {
      out[static_cast<std::size_t>(j)] = image(static_cast<std::size_t>(j));
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace algebroid::kernels
