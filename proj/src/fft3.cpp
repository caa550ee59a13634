// SPDX-License-Identifier: Apache-2.0

#include "tfus/fft3.hpp"

#include <cmath>
#include <cstring>

namespace tfus {

template <typename T>
Fft3<T>::Fft3(Index3 dims) : dims_(dims) {
  for (int a = 0; a < 3; ++a) {
    if (dims_[a] <= 0) throw ArgumentError("fft dims must be positive");
  }
  real_scratch_.resize(real_count());
  cplx_scratch_.resize(spectral_count());
  // FFTW's row-major (n0, n1, n2) maps to our x-fastest (Nz, Ny, Nx); the
  // last (fastest) dimension is the halved real axis. FFTW_ESTIMATE keeps
  // planning deterministic run to run.
  auto* c = reinterpret_cast<typename FftwTraits<T>::Complex*>(cplx_scratch_.data());
  fwd_ = FftwTraits<T>::plan_r2c(dims_[2], dims_[1], dims_[0], real_scratch_.data(), c,
                                 FFTW_ESTIMATE);
  inv_ = FftwTraits<T>::plan_c2r(dims_[2], dims_[1], dims_[0], c, real_scratch_.data(),
                                 FFTW_ESTIMATE);
  if (!fwd_ || !inv_) throw IoError("fftw plan creation failed");
}

template <typename T>
Fft3<T>::~Fft3() {
  if (fwd_) FftwTraits<T>::destroy(fwd_);
  if (inv_) FftwTraits<T>::destroy(inv_);
}

template <typename T>
std::size_t Fft3<T>::real_count() const {
  return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
}

template <typename T>
std::size_t Fft3<T>::spectral_count() const {
  return static_cast<std::size_t>(dims_[0] / 2 + 1) * dims_[1] * dims_[2];
}

template <typename T>
void Fft3<T>::forward(const T* in, Complex* out) {
  // r2c transforms may clobber their input, so stage through the scratch
  std::memcpy(real_scratch_.data(), in, real_count() * sizeof(T));
  FftwTraits<T>::execute_r2c(fwd_, real_scratch_.data(),
                             reinterpret_cast<typename FftwTraits<T>::Complex*>(out));
}

template <typename T>
void Fft3<T>::inverse(Complex* in, T* out) {
  // stage through aligned scratch: c2r clobbers its input, and the plan's
  // alignment contract must hold for arbitrary caller buffers
  std::memcpy(cplx_scratch_.data(), in, spectral_count() * sizeof(Complex));
  FftwTraits<T>::execute_c2r(
      inv_, reinterpret_cast<typename FftwTraits<T>::Complex*>(cplx_scratch_.data()),
      real_scratch_.data());
  std::memcpy(out, real_scratch_.data(), real_count() * sizeof(T));
}

template class Fft3<float>;
template class Fft3<double>;

double fft_wavenumber(int i, int n, double dx_meters) {
  const int m = i <= n / 2 ? i : i - n;
  return 2.0 * M_PI * static_cast<double>(m) / (static_cast<double>(n) * dx_meters);
}

}  // namespace tfus
