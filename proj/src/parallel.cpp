#include "mvskit/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <string>

namespace mvskit {

int max_threads() { return omp_get_max_threads(); }

void set_max_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

void init_threads_from_env() {
  if (const char* env = std::getenv("MVSKIT_THREADS")) {
    try {
      set_max_threads(std::stoi(env));
    } catch (...) {
      // Unparseable values leave the OpenMP default in place.
    }
  }
}

double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    CompensatedSum s;
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) s.add(term(i));
    partial[b] = s.value();
  }
  CompensatedSum total;
  for (double v : partial) total.add(v);
  return total.value();
}

}  // namespace mvskit
