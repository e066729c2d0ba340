#include "snls/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace snls::fft {
namespace {

struct PlanKey {
  int rank;
  int n;
  int sign;
  bool in_place;
  auto operator<=>(const PlanKey&) const = default;
};

class PlanCache {
 public:
  ~PlanCache() {
    std::lock_guard lock(mutex_);
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const PlanKey& key) {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = key.rank == 1 ? key.n : static_cast<std::size_t>(key.n) * key.n;
    std::vector<cplx> scratch_in(total), scratch_out(total);
    auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
    auto* out = key.in_place ? in : reinterpret_cast<fftw_complex*>(scratch_out.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = key.rank == 1 ? fftw_plan_dft_1d(key.n, in, out, key.sign, flags)
                                   : fftw_plan_dft_2d(key.n, key.n, in, out, key.sign, flags);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(std::span<const cplx> in, std::span<cplx> out, int dim, int n, int sign) {
  fftw_plan plan = cache().get({dim, n, sign, in.data() == out.data()});
  // FFTW does not modify the input of an out-of-place complex transform.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  fftw_execute_dft(plan, src, reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

void forward(std::span<const cplx> in, std::span<cplx> out, int dim, int n) {
  execute(in, out, dim, n, FFTW_FORWARD);
}

void inverse(std::span<const cplx> in, std::span<cplx> out, int dim, int n) {
  execute(in, out, dim, n, FFTW_BACKWARD);
}

void forward_1d(std::span<const cplx> in, std::span<cplx> out) {
  execute(in, out, 1, static_cast<int>(in.size()), FFTW_FORWARD);
}

void inverse_1d(std::span<const cplx> in, std::span<cplx> out) {
  execute(in, out, 1, static_cast<int>(in.size()), FFTW_BACKWARD);
}

}  // namespace snls::fft
