// SPDX-License-Identifier: Apache-2.0
//
// Real-to-complex 3D FFT pair over x-fastest volumes, templated on precision
// (float for the production path, double for the reference path). The
// transform keeps x as the halved axis: spectrum dims are (Nx/2+1, Ny, Nz)
// laid out x-fastest. Transforms are unnormalized; callers fold 1/N into
// their spectral multipliers. Plans use deterministic heuristics so repeated
// runs produce identical results.

#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>

#include "tfus/types.hpp"

namespace tfus {

template <typename T>
struct FftwTraits;

template <>
struct FftwTraits<float> {
  using Real = float;
  using Complex = fftwf_complex;
  using Plan = fftwf_plan;
  static void* malloc(std::size_t bytes) { return fftwf_malloc(bytes); }
  static void free(void* p) { fftwf_free(p); }
  static Plan plan_r2c(int n0, int n1, int n2, Real* in, Complex* out, unsigned flags) {
    return fftwf_plan_dft_r2c_3d(n0, n1, n2, in, out, flags);
  }
  static Plan plan_c2r(int n0, int n1, int n2, Complex* in, Real* out, unsigned flags) {
    return fftwf_plan_dft_c2r_3d(n0, n1, n2, in, out, flags);
  }
  static void execute_r2c(Plan p, Real* in, Complex* out) { fftwf_execute_dft_r2c(p, in, out); }
  static void execute_c2r(Plan p, Complex* in, Real* out) { fftwf_execute_dft_c2r(p, in, out); }
  static void destroy(Plan p) { fftwf_destroy_plan(p); }
};

template <>
struct FftwTraits<double> {
  using Real = double;
  using Complex = fftw_complex;
  using Plan = fftw_plan;
  static void* malloc(std::size_t bytes) { return fftw_malloc(bytes); }
  static void free(void* p) { fftw_free(p); }
  static Plan plan_r2c(int n0, int n1, int n2, Real* in, Complex* out, unsigned flags) {
    return fftw_plan_dft_r2c_3d(n0, n1, n2, in, out, flags);
  }
  static Plan plan_c2r(int n0, int n1, int n2, Complex* in, Real* out, unsigned flags) {
    return fftw_plan_dft_c2r_3d(n0, n1, n2, in, out, flags);
  }
  static void execute_r2c(Plan p, Real* in, Complex* out) { fftw_execute_dft_r2c(p, in, out); }
  static void execute_c2r(Plan p, Complex* in, Real* out) { fftw_execute_dft_c2r(p, in, out); }
  static void destroy(Plan p) { fftw_destroy_plan(p); }
};

// FFTW-aligned buffer with RAII ownership.
template <typename T>
class AlignedArray {
 public:
  AlignedArray() = default;
  explicit AlignedArray(std::size_t count) { resize(count); }
  ~AlignedArray() { reset(); }
  AlignedArray(const AlignedArray&) = delete;
  AlignedArray& operator=(const AlignedArray&) = delete;
  AlignedArray(AlignedArray&& o) noexcept : data_(o.data_), size_(o.size_) {
    o.data_ = nullptr;
    o.size_ = 0;
  }
  AlignedArray& operator=(AlignedArray&& o) noexcept {
    if (this != &o) {
      reset();
      data_ = o.data_;
      size_ = o.size_;
      o.data_ = nullptr;
      o.size_ = 0;
    }
    return *this;
  }

  void resize(std::size_t count) {
    reset();
    if (count > 0) {
      data_ = static_cast<T*>(fftwf_malloc(count * sizeof(T)));
      if (!data_) throw std::bad_alloc();
      size_ = count;
    }
  }
  void reset() {
    if (data_) fftwf_free(data_);
    data_ = nullptr;
    size_ = 0;
  }
  void fill(T v) {
    for (std::size_t i = 0; i < size_; ++i) data_[i] = v;
  }

  T* data() { return data_; }
  const T* data() const { return data_; }
  std::size_t size() const { return size_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

 private:
  T* data_ = nullptr;
  std::size_t size_ = 0;
};

template <typename T>
class Fft3 {
 public:
  using Complex = std::complex<T>;

  explicit Fft3(Index3 dims);
  ~Fft3();
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  Index3 real_dims() const { return dims_; }
  // spectrum dims: (Nx/2+1, Ny, Nz), x-fastest
  Index3 spectral_dims() const { return {dims_[0] / 2 + 1, dims_[1], dims_[2]}; }
  std::size_t real_count() const;
  std::size_t spectral_count() const;

  // Both directions stage through internal aligned scratch, so any buffers
  // work and inputs are preserved. Transforms are unnormalized.
  void forward(const T* in, Complex* out);
  void inverse(Complex* in, T* out);

 private:
  Index3 dims_;
  typename FftwTraits<T>::Plan fwd_ = nullptr;
  typename FftwTraits<T>::Plan inv_ = nullptr;
  AlignedArray<T> real_scratch_;
  AlignedArray<Complex> cplx_scratch_;
};

extern template class Fft3<float>;
extern template class Fft3<double>;

// Angular wavenumber for index i on an axis of n points with spacing
// dx_meters: 2 pi f, f = i/n dx for i <= n/2, negative branch above.
double fft_wavenumber(int i, int n, double dx_meters);

}  // namespace tfus
