#pragma once

#include <complex>
#include <cstdint>
#include <memory>

namespace gmrf {

// Two-dimensional complex DFT of a fixed shape, backed by FFTW.  Plans are
// created once per shape and shared; execution is re-entrant provided each
// call uses its own buffers.  `in` and `out` must not alias.
class Fft2d {
 public:
  static std::shared_ptr<const Fft2d> plan(int n1, int n2);

  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  std::int64_t size() const { return static_cast<std::int64_t>(n1_) * n2_; }

  // Unnormalised transforms: inverse(forward(x)) == size() * x.
  void forward(const std::complex<double>* in, std::complex<double>* out) const;
  void inverse(const std::complex<double>* in, std::complex<double>* out) const;

 private:
  Fft2d(int n1, int n2);
  struct Impl;
  int n1_, n2_;
  std::unique_ptr<Impl> impl_;
};

// Process-wide count of executed transforms; used by the benchmark drivers to
// report FFT work per run.
std::uint64_t fft_transform_count();

}  // namespace gmrf
