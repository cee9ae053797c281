#include "occlab/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "occlab/error.hpp"

namespace occlab {

namespace {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : ptr(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (!ptr) throw NumericError("fftw_malloc failed");
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* ptr;
};

struct Plan {
  fftw_plan plan = nullptr;
  ~Plan() {
    if (plan) fftw_destroy_plan(plan);
  }
};

// The planner is not thread safe; execution of a finished plan on fresh
// arrays (fftw_execute_dft) is.
std::mutex planner_mutex;

const Plan& plan_for(std::size_t n, int sign) {
  static std::map<std::pair<std::size_t, int>, std::unique_ptr<Plan>> cache;
  std::lock_guard lock(planner_mutex);
  auto& slot = cache[{n, sign}];
  if (!slot) {
    FftwBuffer in(n), out(n);
    slot = std::make_unique<Plan>();
    slot->plan = fftw_plan_dft_1d(static_cast<int>(n), in.ptr, out.ptr,
                                  sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!slot->plan) throw NumericError("FFTW could not build a plan");
  }
  return *slot;
}

}  // namespace

void dft(std::vector<std::complex<double>>& data, int sign) {
  const std::size_t n = data.size();
  if (n == 0) return;
  const Plan& p = plan_for(n, sign);
  FftwBuffer in(n), out(n);
  std::memcpy(in.ptr, data.data(), sizeof(fftw_complex) * n);
  fftw_execute_dft(p.plan, in.ptr, out.ptr);
  std::memcpy(static_cast<void*>(data.data()), out.ptr, sizeof(fftw_complex) * n);
}

}  // namespace occlab
