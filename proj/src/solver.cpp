// SPDX-License-Identifier: Apache-2.0

#include "tfus/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <type_traits>

#include "tfus/kernels.hpp"
#include "tfus/recorder.hpp"

namespace tfus {
namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) { return std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x; }

// Kernel dispatch: float -> OpenMP kernels, other precisions -> serial twins.
template <typename T>
void k_velocity_update(T* u, const T* dpdx, const T* ir, const T* pml, int axis, Index3 dims) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::velocity_update(u, dpdx, ir, pml, axis, dims);
  } else {
    kernels::serial::velocity_update(u, dpdx, ir, pml, axis, dims);
  }
}

template <typename T>
void k_density_update(T* rho, const T* dudx, const T* dr, const T* pml, int axis, Index3 dims) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::density_update(rho, dudx, dr, pml, axis, dims);
  } else {
    kernels::serial::density_update(rho, dudx, dr, pml, axis, dims);
  }
}

template <typename T>
void k_pressure_lossless(T* p, const T* rx, const T* ry, const T* rz, const T* c2,
                         std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::pressure_lossless(p, rx, ry, rz, c2, n);
  } else {
    kernels::serial::pressure_lossless(p, rx, ry, rz, c2, n);
  }
}

template <typename T>
void k_pressure_absorbing(T* p, const T* rx, const T* ry, const T* rz, const T* c2,
                          const T* tau, const T* eta, const T* l1, const T* l2,
                          std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::pressure_absorbing(p, rx, ry, rz, c2, tau, eta, l1, l2, n);
  } else {
    kernels::serial::pressure_absorbing(p, rx, ry, rz, c2, tau, eta, l1, l2, n);
  }
}

template <typename T>
void k_sum3(T* out, const T* a, const T* b, const T* c, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::sum3(out, a, b, c, n);
  } else {
    kernels::serial::sum3(out, a, b, c, n);
  }
}

template <typename T>
void k_add_inplace(T* out, const T* in, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::add_inplace(out, in, n);
  } else {
    kernels::serial::add_inplace(out, in, n);
  }
}

template <typename T>
void k_mul_inplace(T* out, const T* in, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::mul_inplace(out, in, n);
  } else {
    kernels::serial::mul_inplace(out, in, n);
  }
}

template <typename T>
void k_derivative_spectrum(std::complex<T>* dst, const std::complex<T>* src, const T* kappa,
                           const std::complex<T>* shift, int axis, Index3 sdims) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::derivative_spectrum(dst, src, kappa, shift, axis, sdims);
  } else {
    kernels::serial::derivative_spectrum(dst, src, kappa, shift, axis, sdims);
  }
}

template <typename T>
void k_scale_spectrum(std::complex<T>* dst, const std::complex<T>* src, const T* mult,
                      std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    kernels::scale_spectrum(dst, src, mult, n);
  } else {
    kernels::serial::scale_spectrum(dst, src, mult, n);
  }
}

template <typename T>
T k_max_abs(const T* v, std::size_t n) {
  if constexpr (std::is_same_v<T, float>) {
    return kernels::max_abs(v, n);
  } else {
    return kernels::serial::max_abs(v, n);
  }
}

std::size_t vec_bytes(std::size_t count, std::size_t elem) { return count * elem; }

}  // namespace

TimeParams make_time_params(double f0, double ppw, double cfl, const GridSpec& grid,
                            const AcousticMedium& medium, double t_end_override,
                            double margin, int n_record_periods) {
  if (!(f0 > 0.0)) throw ArgumentError("f0 must be positive");
  if (!(cfl > 0.0 && cfl <= 0.5)) throw ArgumentError("cfl must be in (0, 0.5]");
  if (!(ppw >= 2.0)) throw ArgumentError("ppw must be at least 2");
  if (n_record_periods < 0) throw ArgumentError("n_record_periods must be non-negative");
  grid.validate();
  medium.validate();

  const double dx = *std::min_element(grid.spacing.begin(), grid.spacing.end()) * 1e-3;
  double dt_bound = dx / (std::sqrt(3.0) * medium.c_ref);
  if (!medium.lossless()) {
    // The power-law dispersion correction raises the effective phase speed,
    // c_eff(k)^2 = c^2 (1 + |eta| |k|^(y-1)), and the lossless bound above sits
    // exactly on the stability edge (it equals 2 asin(1)/(c_ref k_max)). Von
    // Neumann analysis of the leapfrog update requires
    //   (c_eff(k)/c_ref) sin(c_ref k dt/2) <= 1 for every mode and voxel,
    // which the worst voxel at the k-space corner turns into the bound below.
    const double k_max = std::sqrt(3.0) * kPi / dx;
    const double y = medium.alpha_power;
    const double tan_abs = std::abs(std::tan(kPi * y / 2.0));
    const double k_pow = std::pow(k_max, y - 1.0);
    double f_max = medium.c_ref;
    for (std::size_t i = 0; i < medium.c.values.size(); ++i) {
      const double alpha = medium.alpha0.values[i];
      if (alpha <= 0.0) continue;  // lossless voxels are covered by c_ref
      const double c = medium.c.values[i];
      const double eta_abs =
          2.0 * absorption_to_nepers(alpha, y) * std::pow(c, y) * tan_abs;
      f_max = std::max(f_max, c * std::sqrt(1.0 + eta_abs * k_pow));
    }
    dt_bound = 2.0 * std::asin(std::min(1.0, medium.c_ref / f_max)) / (medium.c_ref * k_max);
  }
  int ppp = std::max(1, static_cast<int>(std::ceil(ppw / cfl - 1e-9)));
  while (1.0 / (static_cast<double>(ppp) * f0) > dt_bound * (1.0 + 1e-12)) ++ppp;

  TimeParams tp;
  tp.ppp = ppp;
  tp.dt = 1.0 / (static_cast<double>(ppp) * f0);
  tp.cfl = cfl;
  tp.t_end = t_end_override > 0.0
                 ? t_end_override
                 : estimate_t_end(grid, medium, margin, n_record_periods, f0);
  tp.n_steps = static_cast<std::int64_t>(std::ceil(tp.t_end / tp.dt - 1e-9));
  tp.n_steps = std::max(tp.n_steps, static_cast<std::int64_t>(n_record_periods) * ppp);
  return tp;
}

int largest_prime_factor(int n) {
  if (n <= 1) return 1;
  int largest = 1;
  for (int p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      largest = p;
      n /= p;
    }
  }
  return n > 1 ? std::max(largest, n) : largest;
}

int choose_pml_size(int n, int lo, int hi) {
  if (n <= 0) throw ArgumentError("grid size must be positive");
  if (lo < 0 || hi < lo) throw ArgumentError("pml search range is empty or negative");
  int best_t = lo;
  int best_f = largest_prime_factor(n + 2 * lo);
  for (int t = lo + 1; t <= hi; ++t) {
    const int f = largest_prime_factor(n + 2 * t);
    if (f < best_f) {
      best_f = f;
      best_t = t;
    }
  }
  return best_t;
}

PmlProfile build_pml(Index3 thickness, double strength, int order,
                     const GridSpec& padded_grid, double c_ref) {
  padded_grid.validate();
  if (!(strength >= 0.0)) throw ArgumentError("pml strength must be non-negative");
  if (order < 1) throw ArgumentError("pml order must be at least 1");
  if (!(c_ref > 0.0)) throw ArgumentError("c_ref must be positive");
  for (int a = 0; a < 3; ++a) {
    if (thickness[a] < 0) throw ArgumentError("pml thickness must be non-negative");
    if (2 * thickness[a] >= padded_grid.dims[a]) {
      throw ArgumentError("pml layers leave no interior voxels");
    }
  }

  PmlProfile prof;
  prof.thickness = thickness;
  prof.strength = strength;
  prof.order = order;
  for (int a = 0; a < 3; ++a) {
    const int m = padded_grid.dims[a];
    const int t = thickness[a];
    prof.sigma[a].assign(m, 0.0);
    prof.sigma_sg[a].assign(m, 0.0);
    if (t == 0) continue;
    const double scale = strength * c_ref / (padded_grid.spacing[a] * 1e-3);
    const auto sig = [&](double d) {  // d: voxels from the nearest boundary voxel center
      d = std::max(d, 0.0);
      return d < t ? scale * std::pow((t - d) / t, order) : 0.0;
    };
    for (int i = 0; i < m; ++i) {
      prof.sigma[a][i] = std::max(sig(i), sig(m - 1.0 - i));
      prof.sigma_sg[a][i] = std::max(sig(i + 0.5), sig(m - 1.5 - i));
    }
  }
  return prof;
}

template <typename T>
EngineT<T>::EngineT(const AcousticMedium& medium, double dt, Index3 pml_thickness,
                    SolverOptions opts)
    : opts_(opts), dt_(dt) {
  medium.validate();
  if (!(dt > 0.0)) throw ArgumentError("time step must be positive");

  interior_ = medium.grid();
  padded_ = interior_;
  for (int a = 0; a < 3; ++a) {
    if (pml_thickness[a] < 0) throw ArgumentError("pml thickness must be non-negative");
    padded_.dims[a] += 2 * pml_thickness[a];
    padded_.origin[a] -= pml_thickness[a] * padded_.spacing[a];
  }
  padded_.validate();
  c_ref_ = medium.c_ref;
  lossless_ = medium.lossless();

  const Index3 nd = interior_.dims;
  const Index3 pd = padded_.dims;
  const std::size_t pn = padded_.voxel_count();
  const double y = medium.alpha_power;
  const double tan_term = lossless_ ? 0.0 : std::tan(kPi * y / 2.0);

  rho0_.resize(pn);
  c2_.resize(pn);
  dt_rho0_.resize(pn);
  if (!lossless_) {
    tau_.resize(pn);
    eta_.resize(pn);
  }
  const auto clampi = [](int v, int n) { return std::clamp(v, 0, n - 1); };
  for (int k = 0; k < pd[2]; ++k) {
    for (int j = 0; j < pd[1]; ++j) {
      for (int i = 0; i < pd[0]; ++i) {
        const std::size_t n = padded_.linear(i, j, k);
        const std::size_t m =
            interior_.linear(clampi(i - pml_thickness[0], nd[0]),
                             clampi(j - pml_thickness[1], nd[1]),
                             clampi(k - pml_thickness[2], nd[2]));
        const double r = medium.rho.values[m];
        const double c = medium.c.values[m];
        rho0_[n] = static_cast<T>(r);
        c2_[n] = static_cast<T>(c * c);
        dt_rho0_[n] = static_cast<T>(dt * r);
        if (!lossless_) {
          const double a_np = absorption_to_nepers(medium.alpha0.values[m], y);
          tau_[n] = static_cast<T>(-2.0 * a_np * std::pow(c, y - 1.0));
          eta_[n] = static_cast<T>(2.0 * a_np * std::pow(c, y) * tan_term);
        }
      }
    }
  }

  // Harmonic density averages on the staggered grids, periodic wrap at the
  // outer edge (consistent with the FFT derivative's periodicity).
  for (int a = 0; a < 3; ++a) dt_inv_rho_sg_[a].resize(pn);
  for (int k = 0; k < pd[2]; ++k) {
    for (int j = 0; j < pd[1]; ++j) {
      for (int i = 0; i < pd[0]; ++i) {
        const std::size_t n = padded_.linear(i, j, k);
        const double inv = 1.0 / static_cast<double>(rho0_[n]);
        const std::size_t nxp = padded_.linear(i + 1 == pd[0] ? 0 : i + 1, j, k);
        const std::size_t nyp = padded_.linear(i, j + 1 == pd[1] ? 0 : j + 1, k);
        const std::size_t nzp = padded_.linear(i, j, k + 1 == pd[2] ? 0 : k + 1);
        dt_inv_rho_sg_[0][n] =
            static_cast<T>(dt * 0.5 * (inv + 1.0 / static_cast<double>(rho0_[nxp])));
        dt_inv_rho_sg_[1][n] =
            static_cast<T>(dt * 0.5 * (inv + 1.0 / static_cast<double>(rho0_[nyp])));
        dt_inv_rho_sg_[2][n] =
            static_cast<T>(dt * 0.5 * (inv + 1.0 / static_cast<double>(rho0_[nzp])));
      }
    }
  }

  pml_ = build_pml(pml_thickness, opts_.pml_strength, opts_.pml_order, padded_, c_ref_);
  for (int a = 0; a < 3; ++a) {
    pml_factor_[a].resize(pd[a]);
    pml_factor_sg_[a].resize(pd[a]);
    for (int i = 0; i < pd[a]; ++i) {
      pml_factor_[a][i] = static_cast<T>(std::exp(-pml_.sigma[a][i] * dt / 2.0));
      pml_factor_sg_[a][i] = static_cast<T>(std::exp(-pml_.sigma_sg[a][i] * dt / 2.0));
    }
  }

  fft_ = std::make_unique<Fft3<T>>(pd);
  const Index3 sd = fft_->spectral_dims();
  const std::size_t sn = fft_->spectral_count();

  std::array<std::vector<double>, 3> kax;
  for (int a = 0; a < 3; ++a) {
    kax[a].resize(sd[a]);
    const double dxm = padded_.spacing[a] * 1e-3;
    for (int i = 0; i < sd[a]; ++i) kax[a][i] = fft_wavenumber(i, pd[a], dxm);
  }

  const double norm = 1.0 / static_cast<double>(pn);
  kappa_.resize(sn);
  if (!lossless_) {
    nabla1_.resize(sn);
    nabla2_.resize(sn);
  }
  std::size_t n = 0;
  for (int k = 0; k < sd[2]; ++k) {
    for (int j = 0; j < sd[1]; ++j) {
      for (int i = 0; i < sd[0]; ++i, ++n) {
        const double kk = std::sqrt(kax[0][i] * kax[0][i] + kax[1][j] * kax[1][j] +
                                    kax[2][k] * kax[2][k]);
        kappa_[n] = static_cast<T>(norm * sinc(c_ref_ * kk * dt / 2.0));
        if (!lossless_) {
          nabla1_[n] = kk > 0.0 ? static_cast<T>(norm * std::pow(kk, y - 2.0)) : T(0);
          nabla2_[n] = kk > 0.0 ? static_cast<T>(norm * std::pow(kk, y - 1.0)) : T(0);
        }
      }
    }
  }

  for (int a = 0; a < 3; ++a) {
    shift_pos_[a].resize(sd[a]);
    shift_neg_[a].resize(sd[a]);
    const double dxm = padded_.spacing[a] * 1e-3;
    for (int i = 0; i < sd[a]; ++i) {
      const bool nyquist = pd[a] % 2 == 0 && i == pd[a] / 2;
      if (nyquist) {
        shift_pos_[a][i] = std::complex<T>(0, 0);
        shift_neg_[a][i] = std::complex<T>(0, 0);
        continue;
      }
      const double kv = kax[a][i];
      const std::complex<double> ik(0.0, kv);
      const double ph = kv * dxm / 2.0;
      const std::complex<double> e(std::cos(ph), std::sin(ph));
      shift_pos_[a][i] = std::complex<T>(ik * e);
      shift_neg_[a][i] = std::complex<T>(ik * std::conj(e));
    }
  }

  spec_a_.resize(sn);
  spec_b_.resize(sn);
  buf_grad_.resize(pn);
  if (!lossless_) buf_div_.resize(pn);
}

template <typename T>
WaveStateT<T> EngineT<T>::make_state() const {
  WaveStateT<T> s;
  const std::size_t pn = padded_.voxel_count();
  s.p.assign(pn, T(0));
  s.rho_x.assign(pn, T(0));
  s.rho_y.assign(pn, T(0));
  s.rho_z.assign(pn, T(0));
  s.ux.assign(pn, T(0));
  s.uy.assign(pn, T(0));
  s.uz.assign(pn, T(0));
  return s;
}

template <typename T>
void EngineT<T>::set_initial_pressure(WaveStateT<T>& state, const ScalarField3D& p0) const {
  p0.validate();
  if (p0.grid.dims != interior_.dims) {
    throw ArgumentError("initial pressure dims do not match the simulation grid");
  }
  const Index3 nd = interior_.dims;
  for (int k = 0; k < nd[2]; ++k) {
    for (int j = 0; j < nd[1]; ++j) {
      for (int i = 0; i < nd[0]; ++i) {
        const std::size_t n = padded_.linear(i + pml_.thickness[0], j + pml_.thickness[1],
                                             k + pml_.thickness[2]);
        const T v = static_cast<T>(p0.at(i, j, k));
        state.p[n] = v;
        const T r = v / (T(3) * c2_[n]);
        state.rho_x[n] = r;
        state.rho_y[n] = r;
        state.rho_z[n] = r;
      }
    }
  }
}

template <typename T>
void EngineT<T>::set_source(const SourceSet& source, std::function<double(double)> drive) {
  if (!source.nodes.empty() && !drive) {
    throw ArgumentError("source requires a drive function");
  }
  source_nodes_.clear();
  source_nodes_.reserve(source.nodes.size());
  for (const SourceNode& node : source.nodes) {
    const Index3 c = interior_.unlinear(node.index);
    const std::size_t pidx = padded_.linear(c[0] + pml_.thickness[0], c[1] + pml_.thickness[1],
                                            c[2] + pml_.thickness[2]);
    source_nodes_.push_back({pidx, node.weight});
  }
  source_scale_ = 2.0 * dt_ / (c_ref_ * padded_.spacing[0] * 1e-3) * source.calibration;
  drive_ = std::move(drive);
}

template <typename T>
void EngineT<T>::apply_derivative(const std::complex<T>* src, int axis, bool positive_shift,
                                  T* out) {
  const auto& sh = positive_shift ? shift_pos_[axis] : shift_neg_[axis];
  k_derivative_spectrum(spec_b_.data(), src, kappa_.data(), sh.data(), axis,
                        fft_->spectral_dims());
  fft_->inverse(spec_b_.data(), out);
}

template <typename T>
void EngineT<T>::step(WaveStateT<T>& state) {
  const Index3 pd = padded_.dims;
  const std::size_t pn = padded_.voxel_count();
  T* u[3] = {state.ux.data(), state.uy.data(), state.uz.data()};
  T* rho[3] = {state.rho_x.data(), state.rho_y.data(), state.rho_z.data()};

  fft_->forward(state.p.data(), spec_a_.data());
  for (int a = 0; a < 3; ++a) {
    apply_derivative(spec_a_.data(), a, true, buf_grad_.data());
    k_velocity_update(u[a], buf_grad_.data(), dt_inv_rho_sg_[a].data(),
                      pml_factor_sg_[a].data(), a, pd);
  }

  if (!lossless_) std::fill(buf_div_.begin(), buf_div_.end(), T(0));
  for (int a = 0; a < 3; ++a) {
    fft_->forward(u[a], spec_a_.data());
    apply_derivative(spec_a_.data(), a, false, buf_grad_.data());
    k_density_update(rho[a], buf_grad_.data(), dt_rho0_.data(), pml_factor_[a].data(), a, pd);
    if (!lossless_) k_add_inplace(buf_div_.data(), buf_grad_.data(), pn);
  }

  if (!source_nodes_.empty() && drive_) {
    const double t = static_cast<double>(state.step_index) * dt_;
    const T amount = static_cast<T>(source_scale_ * drive_(t));
    if constexpr (std::is_same_v<T, float>) {
      kernels::inject_source(rho[0], rho[1], rho[2], source_nodes_.data(),
                             source_nodes_.size(), amount);
    } else {
      kernels::serial::inject_source(rho[0], rho[1], rho[2], source_nodes_.data(),
                                     source_nodes_.size(), amount);
    }
  }

  if (lossless_) {
    k_pressure_lossless(state.p.data(), rho[0], rho[1], rho[2], c2_.data(), pn);
  } else {
    k_mul_inplace(buf_div_.data(), rho0_.data(), pn);
    fft_->forward(buf_div_.data(), spec_a_.data());
    k_scale_spectrum(spec_a_.data(), spec_a_.data(), nabla1_.data(), spec_a_.size());
    fft_->inverse(spec_a_.data(), buf_div_.data());

    k_sum3(buf_grad_.data(), rho[0], rho[1], rho[2], pn);
    fft_->forward(buf_grad_.data(), spec_a_.data());
    k_scale_spectrum(spec_a_.data(), spec_a_.data(), nabla2_.data(), spec_a_.size());
    fft_->inverse(spec_a_.data(), buf_grad_.data());

    k_pressure_absorbing(state.p.data(), rho[0], rho[1], rho[2], c2_.data(), tau_.data(),
                         eta_.data(), buf_div_.data(), buf_grad_.data(), pn);
  }
  ++state.step_index;
}

template <typename T>
void EngineT<T>::check_finite(const WaveStateT<T>& state) const {
  const T m = k_max_abs(state.p.data(), state.p.size());
  if (!std::isfinite(static_cast<double>(m))) {
    throw DivergenceError("non-finite pressure detected at step " +
                              std::to_string(state.step_index - 1),
                          state.step_index - 1);
  }
}

template <typename T>
RunSummary EngineT<T>::run(WaveStateT<T>& state, std::int64_t n_steps,
                           const std::function<void(std::int64_t, const T*)>& on_step) {
  if (n_steps < 0) throw ArgumentError("n_steps must be non-negative");
  const auto t0 = std::chrono::steady_clock::now();
  const std::int64_t check = std::max(1, opts_.check_interval);
  for (std::int64_t s = 0; s < n_steps; ++s) {
    step(state);
    const std::int64_t done = state.step_index - 1;
    if (on_step) on_step(done, state.p.data());
    if ((s + 1) % check == 0 || s + 1 == n_steps) {
      check_finite(state);
      if (opts_.progress) {
        std::fprintf(stderr, "step %lld/%lld, max|p|=%g\n",
                     static_cast<long long>(s + 1), static_cast<long long>(n_steps),
                     static_cast<double>(k_max_abs(state.p.data(), state.p.size())));
      }
    }
  }
  RunSummary summary;
  summary.steps = n_steps;
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  summary.peak_bytes_estimate = bytes_estimate() + 7 * vec_bytes(state.p.size(), sizeof(T));
  return summary;
}

template <typename T>
std::vector<T> EngineT<T>::extract_interior(const T* padded) const {
  const Index3 nd = interior_.dims;
  std::vector<T> out(interior_.voxel_count());
  for (int k = 0; k < nd[2]; ++k) {
    for (int j = 0; j < nd[1]; ++j) {
      const std::size_t src = padded_.linear(pml_.thickness[0], j + pml_.thickness[1],
                                             k + pml_.thickness[2]);
      const std::size_t dst = interior_.linear(0, j, k);
      std::copy_n(padded + src, nd[0], out.data() + dst);
    }
  }
  return out;
}

template <typename T>
std::size_t EngineT<T>::bytes_estimate() const {
  std::size_t bytes = 0;
  const auto add_real = [&](const std::vector<T>& v) { bytes += v.size() * sizeof(T); };
  add_real(rho0_);
  add_real(c2_);
  add_real(dt_rho0_);
  for (int a = 0; a < 3; ++a) add_real(dt_inv_rho_sg_[a]);
  add_real(tau_);
  add_real(eta_);
  add_real(kappa_);
  add_real(nabla1_);
  add_real(nabla2_);
  add_real(buf_grad_);
  add_real(buf_div_);
  bytes += (spec_a_.size() + spec_b_.size()) * sizeof(std::complex<T>);
  // FFT staging scratch: one real and one spectral volume
  bytes += fft_->real_count() * sizeof(T) + fft_->spectral_count() * sizeof(std::complex<T>);
  return bytes;
}

template class EngineT<float>;
template class EngineT<double>;

std::vector<double> spectral_gradient(const std::vector<double>& field, const GridSpec& grid,
                                      int axis, double shift, double c_ref, double dt) {
  grid.validate();
  if (axis < 0 || axis > 2) throw ArgumentError("axis must be 0, 1, or 2");
  if (field.size() != grid.voxel_count()) {
    throw ArgumentError("field size does not match the grid");
  }

  Fft3<double> fft(grid.dims);
  const Index3 sd = fft.spectral_dims();
  std::vector<std::complex<double>> spec(fft.spectral_count());
  fft.forward(field.data(), spec.data());

  std::array<std::vector<double>, 3> kax;
  for (int a = 0; a < 3; ++a) {
    kax[a].resize(sd[a]);
    for (int i = 0; i < sd[a]; ++i) {
      kax[a][i] = fft_wavenumber(i, grid.dims[a], grid.spacing[a] * 1e-3);
    }
  }

  const double norm = 1.0 / static_cast<double>(grid.voxel_count());
  const double dxm = grid.spacing[axis] * 1e-3;
  const bool even = grid.dims[axis] % 2 == 0;
  std::size_t n = 0;
  for (int k = 0; k < sd[2]; ++k) {
    for (int j = 0; j < sd[1]; ++j) {
      for (int i = 0; i < sd[0]; ++i, ++n) {
        const int ia = axis == 0 ? i : (axis == 1 ? j : k);
        if (even && ia == grid.dims[axis] / 2) {
          spec[n] = 0.0;
          continue;
        }
        const double ka = kax[axis][ia];
        double kappa = 1.0;
        if (c_ref * dt > 0.0) {
          const double kk = std::sqrt(kax[0][i] * kax[0][i] + kax[1][j] * kax[1][j] +
                                      kax[2][k] * kax[2][k]);
          kappa = sinc(c_ref * kk * dt / 2.0);
        }
        const double ph = ka * shift * dxm;
        const std::complex<double> factor =
            std::complex<double>(0.0, ka * kappa * norm) *
            std::complex<double>(std::cos(ph), std::sin(ph));
        spec[n] *= factor;
      }
    }
  }

  std::vector<double> out(field.size());
  fft.inverse(spec.data(), out.data());
  return out;
}

}  // namespace tfus
