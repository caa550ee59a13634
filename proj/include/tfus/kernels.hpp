// SPDX-License-Identifier: Apache-2.0
//
// Voxelwise update kernels for the wave stepper. The production kernels in
// tfus::kernels are OpenMP-parallel single precision; tfus::kernels::serial
// holds plain-loop twins templated on precision, used as the reference
// implementation in tests and by the double-precision reference engine.
// bench_kernels compares the two families.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>

#include "tfus/transducer.hpp"
#include "tfus/types.hpp"

namespace tfus::kernels {

// u = pml * (pml * u - dt_inv_rho0_sg * dpdx), pml indexed along `axis`
void velocity_update(float* u, const float* dpdx, const float* dt_inv_rho0_sg,
                     const float* pml_1d, int axis, Index3 dims);

// rho = pml * (pml * rho - dt_rho0 * dudx), pml indexed along `axis`
void density_update(float* rho, const float* dudx, const float* dt_rho0,
                    const float* pml_1d, int axis, Index3 dims);

// p = c2 * (rx + ry + rz)
void pressure_lossless(float* p, const float* rx, const float* ry, const float* rz,
                       const float* c2, std::size_t n);

// p = c2 * ((rx + ry + rz) + tau * l1 - eta * l2)
void pressure_absorbing(float* p, const float* rx, const float* ry, const float* rz,
                        const float* c2, const float* tau, const float* eta,
                        const float* l1, const float* l2, std::size_t n);

// out = a + b + c
void sum3(float* out, const float* a, const float* b, const float* c, std::size_t n);

void add_inplace(float* out, const float* in, std::size_t n);
void mul_inplace(float* out, const float* in, std::size_t n);

// dst = src * kappa * shift_1d[coordinate along axis], over the spectrum
void derivative_spectrum(std::complex<float>* dst, const std::complex<float>* src,
                         const float* kappa, const std::complex<float>* shift_1d,
                         int axis, Index3 sdims);

// dst = src * mult (real multiplier)
void scale_spectrum(std::complex<float>* dst, const std::complex<float>* src,
                    const float* mult, std::size_t n);

float max_abs(const float* v, std::size_t n);

// rho_{x,y,z}[node] += amount * weight / 3 (single-writer, kept serial)
void inject_source(float* rx, float* ry, float* rz, const SourceNode* nodes,
                   std::size_t count, float amount);

namespace serial {

template <typename T>
void velocity_update(T* u, const T* dpdx, const T* dt_inv_rho0_sg, const T* pml_1d,
                     int axis, Index3 dims) {
  std::size_t n = 0;
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i, ++n) {
        const T pml = pml_1d[axis == 0 ? i : (axis == 1 ? j : k)];
        u[n] = pml * (pml * u[n] - dt_inv_rho0_sg[n] * dpdx[n]);
      }
    }
  }
}

template <typename T>
void density_update(T* rho, const T* dudx, const T* dt_rho0, const T* pml_1d,
                    int axis, Index3 dims) {
  std::size_t n = 0;
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i, ++n) {
        const T pml = pml_1d[axis == 0 ? i : (axis == 1 ? j : k)];
        rho[n] = pml * (pml * rho[n] - dt_rho0[n] * dudx[n]);
      }
    }
  }
}

template <typename T>
void pressure_lossless(T* p, const T* rx, const T* ry, const T* rz, const T* c2,
                       std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) p[i] = c2[i] * (rx[i] + ry[i] + rz[i]);
}

template <typename T>
void pressure_absorbing(T* p, const T* rx, const T* ry, const T* rz, const T* c2,
                        const T* tau, const T* eta, const T* l1, const T* l2,
                        std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = c2[i] * ((rx[i] + ry[i] + rz[i]) + tau[i] * l1[i] - eta[i] * l2[i]);
  }
}

template <typename T>
void sum3(T* out, const T* a, const T* b, const T* c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i] + c[i];
}

template <typename T>
void add_inplace(T* out, const T* in, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += in[i];
}

template <typename T>
void mul_inplace(T* out, const T* in, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] *= in[i];
}

template <typename T>
void derivative_spectrum(std::complex<T>* dst, const std::complex<T>* src, const T* kappa,
                         const std::complex<T>* shift_1d, int axis, Index3 sdims) {
  std::size_t n = 0;
  for (int k = 0; k < sdims[2]; ++k) {
    for (int j = 0; j < sdims[1]; ++j) {
      for (int i = 0; i < sdims[0]; ++i, ++n) {
        dst[n] = src[n] * kappa[n] * shift_1d[axis == 0 ? i : (axis == 1 ? j : k)];
      }
    }
  }
}

template <typename T>
void scale_spectrum(std::complex<T>* dst, const std::complex<T>* src, const T* mult,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] * mult[i];
}

// NaN in the input propagates to the result (divergence detection).
template <typename T>
T max_abs(const T* v, std::size_t n) {
  T m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const T a = std::abs(v[i]);
    if (std::isnan(a)) return a;
    m = std::max(m, a);
  }
  return m;
}

template <typename T>
void inject_source(T* rx, T* ry, T* rz, const SourceNode* nodes, std::size_t count, T amount) {
  const T third = amount / T(3);
  for (std::size_t i = 0; i < count; ++i) {
    const T add = third * static_cast<T>(nodes[i].weight);
    rx[nodes[i].index] += add;
    ry[nodes[i].index] += add;
    rz[nodes[i].index] += add;
  }
}

}  // namespace serial
}  // namespace tfus::kernels
