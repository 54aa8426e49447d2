#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace specvo::detail {

namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int width, int height, bool inverse) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_tuple(width, height, inverse);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    // Planning scratch only; execution goes through fftw_execute_dft.
    auto* scratch = fftw_alloc_complex(static_cast<std::size_t>(width) * height);
    fftw_plan plan = fftw_plan_dft_2d(height, width, scratch, scratch,
                                      inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, bool>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void fft2(ComplexGrid& data, int width, int height, bool inverse) {
  fftw_plan plan = cache().get(width, height, inverse);
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
  if (inverse) {
    const double scale = 1.0 / (static_cast<double>(width) * height);
    for (auto& v : data) v *= scale;
  }
}

}  // namespace specvo::detail
