#include "hwb/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace hwb {
namespace {

// FFTW planning is not thread safe, execution is. Plans are created once per
// (size, sign, placement) and executed through the new-array interface, so
// FFTW_UNALIGNED keeps one code path regardless of where std::vector put the data.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, int sign, bool in_place) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(n, sign, in_place);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* a = fftw_alloc_complex(n);
    auto* b = in_place ? a : fftw_alloc_complex(n);
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT;
    fftw_plan plan = fftw_plan_dft_1d(n, a, b, sign, flags);
    if (b != a) fftw_free(b);
    fftw_free(a);
    if (!plan) throw std::runtime_error("fftw planning failed");
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

void run(std::span<const cplx> in, std::span<cplx> out, int sign) {
  if (in.size() != out.size()) throw std::invalid_argument("fft size mismatch");
  if (in.empty()) return;
  const bool in_place = static_cast<const void*>(in.data()) == static_cast<void*>(out.data());
  fftw_plan plan = cache().get(static_cast<int>(in.size()), sign, in_place);
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plan, src, dst);
}

}  // namespace

void fft_forward(std::span<const cplx> in, std::span<cplx> out) { run(in, out, FFTW_FORWARD); }
void fft_backward(std::span<const cplx> in, std::span<cplx> out) { run(in, out, FFTW_BACKWARD); }

CVec fft_forward(std::span<const cplx> in) {
  CVec out(in.size());
  fft_forward(in, out);
  return out;
}

CVec fft_backward(std::span<const cplx> in) {
  CVec out(in.size());
  fft_backward(in, out);
  return out;
}

}  // namespace hwb
