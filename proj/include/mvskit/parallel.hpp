#pragma once

#include <cstddef>
#include <cmath>
#include <functional>
#include <vector>

namespace mvskit {

// Thread count used by all OpenMP kernels. Honors MVSKIT_THREADS when set.
int max_threads();
void set_max_threads(int n);
void init_threads_from_env();

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Sum of term(i) over [0, n). The range is cut into fixed-size blocks that are
// reduced in parallel and combined in block order, so the result does not
// depend on the thread count or schedule.
double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term);

}  // namespace mvskit
