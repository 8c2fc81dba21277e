#include "fft3.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace xtal::fft {

namespace {

// FFTW planning is not thread-safe; execution through fftw_execute_dft on
// distinct buffers is. Plans live for the process.
std::mutex g_plan_mutex;
std::map<std::tuple<int, int, int, int>, fftw_plan>& plan_cache() {
  static std::map<std::tuple<int, int, int, int>, fftw_plan> cache;
  return cache;
}

fftw_plan get_plan(const Index3& dims, int sign) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  const auto key = std::make_tuple(dims[0], dims[1], dims[2], sign);
  auto& cache = plan_cache();
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const std::size_t n =
      static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  fftw_complex* tmp = fftw_alloc_complex(n);
  fftw_plan plan =
      fftw_plan_dft_3d(dims[0], dims[1], dims[2], tmp, tmp,
                       sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                       FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(tmp);
  cache.emplace(key, plan);
  return plan;
}

}  // namespace

void c2c_inplace(const Index3& dims, std::complex<double>* buf, int sign) {
  fftw_plan plan = get_plan(dims, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(buf),
                   reinterpret_cast<fftw_complex*>(buf));
}

}  // namespace xtal::fft
