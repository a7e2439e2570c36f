#include "gmrf/fft.hpp"

#include <fftw3.h>

#include <atomic>
#include <map>
#include <mutex>
#include <stdexcept>

namespace gmrf {

namespace {
std::atomic<std::uint64_t> g_transforms{0};
// FFTW plan creation is not thread safe; execution via the new-array
// interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Fft2d::Impl {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

Fft2d::Fft2d(int n1, int n2) : n1_(n1), n2_(n2), impl_(new Impl) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("Fft2d: shape must be positive");
  const std::int64_t n = size();
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_complex* a = fftw_alloc_complex(static_cast<std::size_t>(n));
  fftw_complex* b = fftw_alloc_complex(static_cast<std::size_t>(n));
  // FFTW_UNALIGNED lets the plan execute on any caller buffer.
  impl_->fwd = fftw_plan_dft_2d(n1, n2, a, b, FFTW_FORWARD,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
  impl_->inv = fftw_plan_dft_2d(n1, n2, a, b, FFTW_BACKWARD,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(a);
  fftw_free(b);
  if (!impl_->fwd || !impl_->inv) throw std::runtime_error("Fft2d: planning failed");
}

Fft2d::~Fft2d() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
  if (impl_->inv) fftw_destroy_plan(impl_->inv);
}

std::shared_ptr<const Fft2d> Fft2d::plan(int n1, int n2) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::weak_ptr<const Fft2d>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto& slot = cache[{n1, n2}];
  if (auto existing = slot.lock()) return existing;
  std::shared_ptr<const Fft2d> made(new Fft2d(n1, n2));
  slot = made;
  return made;
}

void Fft2d::forward(const std::complex<double>* in, std::complex<double>* out) const {
  fftw_execute_dft(impl_->fwd,
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  g_transforms.fetch_add(1, std::memory_order_relaxed);
}

void Fft2d::inverse(const std::complex<double>* in, std::complex<double>* out) const {
  fftw_execute_dft(impl_->inv,
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  g_transforms.fetch_add(1, std::memory_order_relaxed);
}

std::uint64_t fft_transform_count() {
  return g_transforms.load(std::memory_order_relaxed);
}

}  // namespace gmrf
