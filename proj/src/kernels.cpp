// SPDX-License-Identifier: Apache-2.0

#include "tfus/kernels.hpp"

#include <limits>

namespace tfus::kernels {

void velocity_update(float* u, const float* dpdx, const float* dt_inv_rho0_sg,
                     const float* pml_1d, int axis, Index3 dims) {
  const int nx = dims[0], ny = dims[1], nz = dims[2];
#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      const std::size_t row = (static_cast<std::size_t>(k) * ny + j) * nx;
      const float pml_row = axis == 0 ? 0.0f : pml_1d[axis == 1 ? j : k];
      if (axis == 0) {
        for (int i = 0; i < nx; ++i) {
          const float pml = pml_1d[i];
          u[row + i] = pml * (pml * u[row + i] - dt_inv_rho0_sg[row + i] * dpdx[row + i]);
        }
      } else {
        for (int i = 0; i < nx; ++i) {
          u[row + i] = pml_row * (pml_row * u[row + i] - dt_inv_rho0_sg[row + i] * dpdx[row + i]);
        }
      }
    }
  }
}

void density_update(float* rho, const float* dudx, const float* dt_rho0,
                    const float* pml_1d, int axis, Index3 dims) {
  const int nx = dims[0], ny = dims[1], nz = dims[2];
#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      const std::size_t row = (static_cast<std::size_t>(k) * ny + j) * nx;
      const float pml_row = axis == 0 ? 0.0f : pml_1d[axis == 1 ? j : k];
      if (axis == 0) {
        for (int i = 0; i < nx; ++i) {
          const float pml = pml_1d[i];
          rho[row + i] = pml * (pml * rho[row + i] - dt_rho0[row + i] * dudx[row + i]);
        }
      } else {
        for (int i = 0; i < nx; ++i) {
          rho[row + i] = pml_row * (pml_row * rho[row + i] - dt_rho0[row + i] * dudx[row + i]);
        }
      }
    }
  }
}

void pressure_lossless(float* p, const float* rx, const float* ry, const float* rz,
                       const float* c2, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    p[i] = c2[i] * (rx[i] + ry[i] + rz[i]);
  }
}

void pressure_absorbing(float* p, const float* rx, const float* ry, const float* rz,
                        const float* c2, const float* tau, const float* eta,
                        const float* l1, const float* l2, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    p[i] = c2[i] * ((rx[i] + ry[i] + rz[i]) + tau[i] * l1[i] - eta[i] * l2[i]);
  }
}

void sum3(float* out, const float* a, const float* b, const float* c, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    out[i] = a[i] + b[i] + c[i];
  }
}

void add_inplace(float* out, const float* in, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) out[i] += in[i];
}

void mul_inplace(float* out, const float* in, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) out[i] *= in[i];
}

void derivative_spectrum(std::complex<float>* dst, const std::complex<float>* src,
                         const float* kappa, const std::complex<float>* shift_1d,
                         int axis, Index3 sdims) {
  const int nx = sdims[0], ny = sdims[1], nz = sdims[2];
#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      const std::size_t row = (static_cast<std::size_t>(k) * ny + j) * nx;
      if (axis == 0) {
        for (int i = 0; i < nx; ++i) dst[row + i] = src[row + i] * kappa[row + i] * shift_1d[i];
      } else {
        const std::complex<float> s = shift_1d[axis == 1 ? j : k];
        for (int i = 0; i < nx; ++i) dst[row + i] = src[row + i] * kappa[row + i] * s;
      }
    }
  }
}

void scale_spectrum(std::complex<float>* dst, const std::complex<float>* src,
                    const float* mult, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) dst[i] = src[i] * mult[i];
}

float max_abs(const float* v, std::size_t n) {
  float m = 0.0f;
  bool has_nan = false;
#pragma omp parallel for schedule(static) reduction(max : m) reduction(|| : has_nan)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const float a = std::abs(v[i]);
    has_nan = has_nan || std::isnan(a);
    m = std::max(m, a);
  }
  return has_nan ? std::numeric_limits<float>::quiet_NaN() : m;
}

void inject_source(float* rx, float* ry, float* rz, const SourceNode* nodes,
                   std::size_t count, float amount) {
  serial::inject_source(rx, ry, rz, nodes, count, amount);
}

}  // namespace tfus::kernels
