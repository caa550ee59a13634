// SPDX-License-Identifier: Apache-2.0
//
// k-space pseudo-spectral time-domain stepper for the coupled first-order
// linear acoustic equations in heterogeneous absorbing media, with staggered
// grids, split-field PML, and power-law absorption via fractional Laplacians.
//
// EngineT<float> is the production engine (OpenMP kernels); EngineT<double>
// runs the serial reference kernels and is used for high-accuracy checks.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "tfus/fft3.hpp"
#include "tfus/medium.hpp"
#include "tfus/transducer.hpp"
#include "tfus/types.hpp"

namespace tfus {

struct TimeParams {
  double dt = 0.0;       // s
  std::int64_t n_steps = 0;
  int ppp = 0;           // time steps per acoustic period
  double cfl = 0.0;
  double t_end = 0.0;    // s
};

// ppp = ceil(ppw/cfl); dt = 1/(ppp*f0), with ppp raised until
// dt <= dx/(sqrt(3)*c_ref). t_end_override <= 0 means "estimate".
TimeParams make_time_params(double f0, double ppw, double cfl, const GridSpec& grid,
                            const AcousticMedium& medium, double t_end_override = 0.0,
                            double margin = 1.5, int n_record_periods = 3);

// Thickness in [lo, hi] minimizing the largest prime factor of n + 2t
// (ties -> smaller t); keeps padded FFT lengths friendly.
int choose_pml_size(int n, int lo, int hi);

int largest_prime_factor(int n);

struct PmlProfile {
  Index3 thickness{0, 0, 0};  // voxels per side, per axis
  double strength = 2.0;      // nepers per voxel at the outer boundary
  int order = 4;
  // absorption rates in nepers/s on the padded grid, per axis;
  // sigma at voxel centers, sigma_sg at +1/2 staggered positions
  std::array<std::vector<double>, 3> sigma;
  std::array<std::vector<double>, 3> sigma_sg;
};

// sigma(d) = strength*((t-d)/t)^order * c_ref/dx for d < t voxels from the
// nearest boundary voxel center (distance clamped at 0), else 0.
PmlProfile build_pml(Index3 thickness, double strength, int order,
                     const GridSpec& padded_grid, double c_ref);

template <typename T>
struct WaveStateT {
  std::vector<T> p;                  // Pa
  std::vector<T> rho_x, rho_y, rho_z;  // kg/m^3 (acoustic density splits)
  std::vector<T> ux, uy, uz;         // m/s, staggered +1/2 along own axis
  std::int64_t step_index = 0;
};

struct SolverOptions {
  double pml_strength = 2.0;  // nepers per voxel
  int pml_order = 4;
  bool progress = false;      // "step k/N, max|p|=..." lines on stderr
  int check_interval = 25;    // divergence-check cadence in steps
};

struct RunSummary {
  std::int64_t steps = 0;
  double wall_seconds = 0.0;
  std::size_t peak_bytes_estimate = 0;
};

template <typename T>
class EngineT {
 public:
  // Pads the medium by `pml_thickness` voxels of edge replication per side.
  EngineT(const AcousticMedium& medium, double dt, Index3 pml_thickness,
          SolverOptions opts = {});

  const GridSpec& padded_grid() const { return padded_; }
  const GridSpec& interior_grid() const { return interior_; }
  Index3 pml_thickness() const { return pml_.thickness; }
  const PmlProfile& pml() const { return pml_; }
  double dt() const { return dt_; }
  double c_ref() const { return c_ref_; }
  bool lossless() const { return lossless_; }

  // Padded per-voxel coefficient arrays (for tests and energy audits).
  const std::vector<T>& rho0() const { return rho0_; }
  const std::vector<T>& c2() const { return c2_; }
  const std::vector<T>& dt_rho0() const { return dt_rho0_; }
  const std::vector<T>& dt_inv_rho0_sg(int axis) const { return dt_inv_rho_sg_[axis]; }
  const std::vector<T>& pml_factor(int axis) const { return pml_factor_[axis]; }
  const std::vector<T>& pml_factor_sg(int axis) const { return pml_factor_sg_[axis]; }

  WaveStateT<T> make_state() const;

  // p0 given on the interior grid; density splits get p0/(3*c^2) each.
  void set_initial_pressure(WaveStateT<T>& state, const ScalarField3D& p0) const;

  // Source nodes indexed on the interior grid; drive(t) in Pa. The injected
  // density-sum increment per step is drive(t)*weight*2*dt/(c_ref*dx) times
  // the source calibration factor.
  void set_source(const SourceSet& source, std::function<double(double)> drive);

  void step(WaveStateT<T>& state);

  // Runs n_steps; on_step (optional) is called after each completed step with
  // (step index just executed, padded pressure pointer).
  RunSummary run(WaveStateT<T>& state, std::int64_t n_steps,
                 const std::function<void(std::int64_t, const T*)>& on_step = {});

  std::vector<T> extract_interior(const T* padded) const;
  std::size_t bytes_estimate() const;

 private:
  void apply_derivative(const std::complex<T>* src, int axis, bool positive_shift, T* out);
  void check_finite(const WaveStateT<T>& state) const;

  GridSpec interior_, padded_;
  PmlProfile pml_;
  SolverOptions opts_;
  double dt_ = 0.0, c_ref_ = 0.0;
  bool lossless_ = true;

  std::vector<T> rho0_, c2_, dt_rho0_;
  std::array<std::vector<T>, 3> dt_inv_rho_sg_;
  std::vector<T> tau_, eta_;
  std::array<std::vector<T>, 3> pml_factor_, pml_factor_sg_;

  std::vector<T> kappa_;           // sinc correction, 1/N folded, spectral dims
  std::vector<T> nabla1_, nabla2_; // |k|^(y-2)/N, |k|^(y-1)/N, zero at k=0
  std::array<std::vector<std::complex<T>>, 3> shift_pos_, shift_neg_;

  std::unique_ptr<Fft3<T>> fft_;
  std::vector<std::complex<T>> spec_a_, spec_b_;
  std::vector<T> buf_grad_, buf_div_;

  std::vector<SourceNode> source_nodes_;  // padded indices
  double source_scale_ = 0.0;
  std::function<double(double)> drive_;
};

using Engine = EngineT<float>;
using ReferenceEngine = EngineT<double>;

extern template class EngineT<float>;
extern template class EngineT<double>;

// Reference FFT derivative on an arbitrary grid, double precision:
// multiply the spectrum by i*k_axis*kappa*exp(i*k_axis*shift*dx), where
// shift is +0.5, -0.5, or 0 voxels and kappa = sinc(c_ref*|k|*dt/2)
// (kappa = 1 when c_ref*dt = 0); Nyquist components zeroed.
std::vector<double> spectral_gradient(const std::vector<double>& field, const GridSpec& grid,
                                      int axis, double shift, double c_ref = 0.0,
                                      double dt = 0.0);

}  // namespace tfus
