// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate. Runs every release criterion end to end, prints exactly
// one PASS/FAIL line per criterion, and exits nonzero if any fail. Expensive
// wave runs live here rather than in the unit suite.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tfus/config.hpp"
#include "tfus/medium.hpp"
#include "tfus/metrics.hpp"
#include "tfus/npy.hpp"
#include "tfus/pipeline.hpp"
#include "tfus/recorder.hpp"
#include "tfus/solver.hpp"
#include "tfus/transducer.hpp"
#include "tfus/types.hpp"
#include "tfus/volume.hpp"

using namespace tfus;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 6.283185307179586;
constexpr double kPi = 3.141592653589793;

int g_failures = 0;
std::vector<std::string> g_notes;

void expect(bool ok, const std::string& what) {
  if (!ok) g_notes.push_back(what);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

template <typename Fn>
void criterion(int id, const char* name, Fn&& fn) {
  g_notes.clear();
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  try {
    fn();
    ok = g_notes.empty();
    for (std::size_t i = 0; i < g_notes.size(); ++i) {
      if (i) detail += "; ";
      detail += g_notes[i];
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s  %2d  %-58s (%7.1f s)%s%s\n", ok ? "PASS" : "FAIL", id, name, secs,
              ok ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

GridSpec grid_of(Index3 dims, double spacing = 0.5) {
  GridSpec g;
  g.dims = dims;
  g.spacing = {spacing, spacing, spacing};
  return g;
}

AcousticMedium uniform_medium(const GridSpec& g, double rho, double c, double alpha,
                              double y = 1.1) {
  AcousticMedium m;
  m.rho = ScalarField3D(g, Unit::Density, static_cast<float>(rho));
  m.c = ScalarField3D(g, Unit::SoundSpeed, static_cast<float>(c));
  m.alpha0 = ScalarField3D(g, Unit::Absorption, static_cast<float>(alpha));
  m.alpha_power = y;
  m.c_ref = c;
  return m;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// shared state across criteria
fs::path g_dir;
std::string g_water_npz;          // from criterion 10, reused by 11
double g_focal_amp3 = 0.0;        // from criterion 4, reused by 12
double g_focal_amp6 = 0.0;
bool g_c4_done = false;

// ---------------------------------------------------------------------------

void c1_discretization() {
  const HuMappingParams hu;
  const double dx_mm = hu.c_min / (500e3 * 6.0) * 1e3;
  expect(dx_mm == 0.5, "dx = " + fmt(dx_mm) + " mm, want 0.5 exactly");

  const GridSpec g = grid_of({32, 32, 32});
  const auto tp = make_time_params(500e3, 6.0, 0.3, g, make_water_medium(g));
  expect(tp.ppp == 20, "ppp = " + std::to_string(tp.ppp) + ", want 20");
  expect(tp.dt == 1e-7, "dt = " + fmt(tp.dt) + " s, want 1e-7 exactly");
}

void c2_hu_mapping() {
  const HuMappingParams p;
  expect(hu_to_density(2000.0, p) == 1900.0, "rho(2000) != 1900");
  expect(density_to_sound_speed(1900.0, p) == 3100.0, "c(rho=1900) != 3100");
  expect(hu_to_absorption(2000.0, p) == 4.0, "alpha(2000) != 4.0");
  expect(hu_to_absorption(300.0, p) == 8.7, "alpha(300) != 8.7");
  const double mid = hu_to_absorption(1150.0, p);
  expect(std::abs(mid - 5.3765) <= 1e-3, "alpha(1150) = " + fmt(mid) + ", want 5.3765 +- 1e-3");
}

void c3_dispersion() {
  const GridSpec g = grid_of({64, 64, 64});
  const auto medium = make_water_medium(g);
  const double dt = 1e-7;
  const int mode = 8;  // 8 points per wavelength along x
  const double kx = kTwoPi * mode / (64.0 * 0.5e-3);
  const double omega = 1500.0 * kx;

  Engine engine(medium, dt, {0, 0, 0});
  ScalarField3D p0(g, Unit::Pressure);
  for (int k = 0; k < 64; ++k)
    for (int j = 0; j < 64; ++j)
      for (int i = 0; i < 64; ++i)
        p0.at(i, j, k) = static_cast<float>(1000.0 * std::cos(kTwoPi * mode * i / 64.0));
  auto state = engine.make_state();
  engine.set_initial_pressure(state, p0);

  std::vector<double> a;
  const std::size_t count = g.voxel_count();
  engine.run(state, 200, [&](std::int64_t, const float* p) {
    double acc = 0.0;
    std::size_t n = 0;
    for (int k = 0; k < 64; ++k)
      for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i, ++n) acc += p[n] * std::cos(kTwoPi * mode * i / 64.0);
    a.push_back(2.0 * acc / static_cast<double>(count));
  });

  double max_phase_err = 0.0;
  const double s = std::sin(omega * dt);
  double r_min = 1e300, r_max = 0.0, r_sum = 0.0;
  int n_r = 0;
  for (std::size_t n = 1; n + 1 < a.size(); ++n) {
    if (std::abs(a[n]) > 300.0) {
      const double r = std::clamp((a[n + 1] + a[n - 1]) / (2.0 * a[n]), -1.0, 1.0);
      max_phase_err = std::max(max_phase_err, std::abs(std::acos(r) / dt / omega - 1.0));
    }
    const double quad = (a[n + 1] - a[n - 1]) / (2.0 * s);
    const double radius = std::hypot(a[n], quad);
    r_min = std::min(r_min, radius);
    r_max = std::max(r_max, radius);
    r_sum += radius;
    ++n_r;
  }
  const double r_mean = r_sum / n_r;
  expect(max_phase_err < 1e-3,
         "phase-speed error " + fmt(max_phase_err * 100) + " %, want < 0.1 %");
  expect(std::abs(r_mean / 1000.0 - 1.0) < 0.01,
         "amplitude " + fmt(r_mean) + " Pa vs 1000, want < 1 % error");
  expect((r_max - r_min) / r_mean < 0.01,
         "amplitude drift " + fmt((r_max - r_min) / r_mean * 100) + " %, want < 1 %");
}

void c4_focused_bowl() {
  const GridSpec g = grid_of({128, 128, 128});
  const auto medium = make_water_medium(g);

  BowlTransducer t;
  t.position = {32.0, 32.0, 6.0};
  t.focus = {32.0, 32.0, 36.0};
  t.roc = 30.0;
  t.diameter = 20.0;
  t.f0 = 500e3;
  t.amplitude = 60e3;
  t.validate();

  const auto tp = make_time_params(t.f0, 6.0, 0.3, g, medium, 5.2e-5, 1.5, 6);
  const auto plan = make_recording_plan(tp.n_steps, tp.ppp, 6);
  SlabStore store(g, plan);

  Engine engine(medium, tp.dt, {16, 16, 16});
  const SourceSet src = make_source(t, g, 0.25);
  engine.set_source(src, [&t](double time) { return drive_signal(t, time); });
  auto state = engine.make_state();
  const Index3 padded = engine.padded_grid().dims;
  const Index3 pml = engine.pml_thickness();
  engine.run(state, tp.n_steps, [&](std::int64_t done, const float* p) {
    store.put_step(done, p, padded, pml);
  });

  const AmplitudeField amp6 = extract_amplitude(store, t.f0, tp.ppp);
  const AmplitudeField amp3 =
      extract_amplitude(store, t.f0, tp.ppp, 3 * tp.ppp, 3 * tp.ppp);

  // oracle: axial Rayleigh integral of the bowl
  const double zeta_peak = oracle::axial_peak_zeta(t, 1500.0, -25.0, 20.0);
  const double oracle_peak_pa = oracle::axial_bowl_amplitude(t, 1500.0, zeta_peak);
  const double half = oracle_peak_pa / 2.0;
  const auto axial = [&](double zeta) { return oracle::axial_bowl_amplitude(t, 1500.0, zeta); };
  double zlo = zeta_peak, zhi = zeta_peak;
  while (axial(zlo) >= half && zlo > -25.0) zlo -= 1e-3;
  while (axial(zhi) >= half && zhi < 20.0) zhi += 1e-3;
  const double oracle_len_mm = zhi - zlo;

  // simulated peak
  const std::size_t peak_idx = amp6.amplitude.argmax();
  const Index3 pv = g.unlinear(peak_idx);
  const double sim_peak = amp6.amplitude.values[peak_idx];
  expect(std::abs(pv[0] - 64) <= 1 && std::abs(pv[1] - 64) <= 1,
         "peak off axis at (" + std::to_string(pv[0]) + "," + std::to_string(pv[1]) + ")");
  expect(std::abs(sim_peak / oracle_peak_pa - 1.0) <= 0.05,
         "peak " + fmt(sim_peak) + " Pa vs oracle " + fmt(oracle_peak_pa) + ", want within 5 %");

  std::vector<double> line(128);
  for (int z = 0; z < 128; ++z) line[static_cast<std::size_t>(z)] = amp6.amplitude.at(64, 64, z);

  // Sub-voxel focal position: the axial lobe is flat-topped (~32 mm at -6 dB),
  // so a discrete argmax is only voxel-accurate.  Fit a least-squares parabola
  // over +-6 voxels and compare vertices; the same estimator runs on the
  // oracle curve sampled at voxel centers so the window bias cancels.
  const auto parabola_vertex = [](const std::vector<double>& w, int z0) {
    double s2 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
    for (int dz = -6; dz <= 6; ++dz) {
      const double x = dz, yv = w[static_cast<std::size_t>(z0 + dz)];
      s2 += x * x;
      s4 += x * x * x * x;
      t0 += yv;
      t1 += x * yv;
      t2 += x * x * yv;
    }
    const double n = 13.0;
    const double a = (n * t2 - s2 * t0) / (n * s4 - s2 * s2);
    const double b = t1 / s2;
    return z0 - b / (2.0 * a);
  };
  std::vector<double> oline(128, 0.0);
  for (int z = 0; z < 128; ++z) {
    const double zeta = 0.5 * z - 36.0;
    if (zeta > -25.0 && zeta < 20.0) oline[static_cast<std::size_t>(z)] = axial(zeta);
  }
  const int o_argmax = static_cast<int>(
      std::max_element(oline.begin(), oline.end()) - oline.begin());
  const int s_argmax = pv[2];
  const double o_vertex = parabola_vertex(oline, o_argmax);
  const double s_vertex = parabola_vertex(line, s_argmax);
  expect(std::abs(s_vertex - o_vertex) <= 1.0,
         "peak z " + fmt(s_vertex) + " vs oracle " + fmt(o_vertex) + ", want within 1 voxel");

  // -6 dB axial focal length from the simulated field (half of the sim peak
  // along the beam axis, linear interpolation at the crossings)
  const double sim_half = sim_peak / 2.0;
  int q = pv[2];
  while (q > 0 && line[static_cast<std::size_t>(q - 1)] >= sim_half) --q;
  double z_lo_vox = q;
  if (q > 0) {
    const double a = line[static_cast<std::size_t>(q - 1)], b = line[static_cast<std::size_t>(q)];
    z_lo_vox = (q - 1) + (sim_half - a) / (b - a);
  }
  int r = pv[2];
  while (r < 127 && line[static_cast<std::size_t>(r + 1)] >= sim_half) ++r;
  double z_hi_vox = r;
  if (r < 127) {
    const double a = line[static_cast<std::size_t>(r)], b = line[static_cast<std::size_t>(r + 1)];
    z_hi_vox = r + (a - sim_half) / (a - b);
  }
  const double sim_len_mm = (z_hi_vox - z_lo_vox) * 0.5;
  expect(std::abs(sim_len_mm / oracle_len_mm - 1.0) <= 0.10,
         "-6 dB length " + fmt(sim_len_mm) + " mm vs oracle " + fmt(oracle_len_mm) +
             " mm, want within 10 %");

  g_focal_amp6 = sim_peak;
  g_focal_amp3 = amp3.amplitude.values[peak_idx];
  g_c4_done = true;
}

void c5_absorption() {
  // An initial-value wavetrain isolates the absorption operator from the
  // near-field halo that voxelized mass sources carry, so the measured decay
  // compares cleanly against the closed form.
  const GridSpec g = grid_of({460, 8, 8});
  const auto medium = uniform_medium(g, 1000.0, 1500.0, 4.0);
  Engine engine(medium, 1e-7, {10, 0, 0});

  ScalarField3D p0(g, Unit::Pressure);
  const double k0dx = kTwoPi * 500e3 / 1500.0 * 0.5e-3;  // carrier phase per voxel
  for (int k = 0; k < 8; ++k)
    for (int j = 0; j < 8; ++j)
      for (int i = 0; i < 460; ++i) {
        const double x = i - 80.0;
        p0.at(i, j, k) =
            static_cast<float>(1e4 * std::exp(-0.5 * x * x / 400.0) * std::cos(k0dx * x));
      }
  auto state = engine.make_state();
  engine.set_initial_pressure(state, p0);

  const auto& pg = engine.padded_grid();
  // At 6 points per wavelength the lattice max of |p| undershoots the true
  // envelope by up to cos(pi/6) depending on crest alignment, so estimate the
  // envelope with the same three-point quadrature used for the dispersion
  // criterion: env^2 = p_i^2 + ((p_{i+1} - p_{i-1}) / (2 sin(k0 dx)))^2.
  const auto packet_peak = [&]() {
    const double s2 = 2.0 * std::sin(k0dx);
    double peak = 0.0;
    for (int i = 120; i < 450; ++i) {
      const double pm = double(state.p[pg.linear(i + 9, 4, 4)]);
      const double pc = double(state.p[pg.linear(i + 10, 4, 4)]);
      const double pp = double(state.p[pg.linear(i + 11, 4, 4)]);
      peak = std::max(peak, std::hypot(pc, (pp - pm) / s2));
    }
    return peak;
  };
  engine.run(state, 200);  // right-going packet well clear of the source site
  const double peak1 = packet_peak();
  engine.run(state, 133);  // 13.3 us -> 19.95 mm of travel
  const double peak2 = packet_peak();

  const double measured = peak2 / peak1;
  const double dist_m = 1500.0 * 133.0 * 1e-7;
  const double expected = oracle::powerlaw_decay(4.0, 1.1, 500e3, dist_m);
  expect(std::abs(measured / expected - 1.0) <= 0.05,
         "decay over " + fmt(dist_m * 1e3) + " mm: " + fmt(measured) + " vs power law " +
             fmt(expected) + ", want within 5 %");
}

void c6_pml_reflection() {
  const double dt = 1e-7;
  const auto pulse = [](const GridSpec& g, int xc) {
    ScalarField3D f(g, Unit::Pressure);
    for (int k = 0; k < g.dims[2]; ++k)
      for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 0; i < g.dims[0]; ++i)
          f.at(i, j, k) = static_cast<float>(std::exp(-0.5 * (i - xc) * (i - xc) / 16.0));
    return f;
  };

  const GridSpec ga = grid_of({108, 4, 4});
  ReferenceEngine ea(make_water_medium(ga), dt, {10, 0, 0});  // the 10-voxel default
  auto sa = ea.make_state();
  ea.set_initial_pressure(sa, pulse(ga, 54));
  ea.run(sa, 350);
  const auto pa = ea.extract_interior(sa.p.data());

  const GridSpec gb = grid_of({216, 4, 4});
  ReferenceEngine eb(make_water_medium(gb), dt, {0, 0, 0});
  auto sb = eb.make_state();
  eb.set_initial_pressure(sb, pulse(gb, 108));
  eb.run(sb, 350);

  double diff = 0.0, ref_window = 0.0;
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 108; ++i) {
        const double vb = sb.p[gb.linear(i + 54, j, k)];
        ref_window = std::max(ref_window, std::abs(vb));
        diff = std::max(diff, std::abs(pa[ga.linear(i, j, k)] - vb));
      }
  expect(ref_window < 1e-6, "reference pulse still in window: " + fmt(ref_window));
  // the unit standing pulse splits into two 0.5-amplitude traveling pulses,
  // so the incident amplitude at the boundary is 0.5
  expect(diff / 0.5 <= 0.0316,
         "reflection " + fmt(20.0 * std::log10(diff / 0.5)) + " dB of incident, want <= -30 dB");
}

void c7_pml_sizing() {
  // exhaustive-factorization oracle
  const auto lpf = [](int n) {
    int best = 1;
    for (int f = 2; f <= n; ++f)
      while (n % f == 0) {
        best = f;
        n /= f;
      }
    return best;
  };
  expect(choose_pml_size(256, 10, 20) == 16, "choose_pml_size(256) != 16");
  expect(choose_pml_size(236, 10, 20) == 10, "choose_pml_size(236) != 10");
  for (int n : {64, 100, 128, 236, 256, 300}) {
    const int t_star = choose_pml_size(n, 10, 20);
    int best = 1 << 30;
    for (int t = 10; t <= 20; ++t) best = std::min(best, lpf(n + 2 * t));
    expect(lpf(n + 2 * t_star) == best,
           "n=" + std::to_string(n) + ": lpf(" + std::to_string(n + 2 * t_star) +
               ") != " + std::to_string(best));
    for (int t = 10; t < t_star; ++t) {
      expect(lpf(n + 2 * t) > best, "n=" + std::to_string(n) + ": tie not broken downward");
    }
  }
}

void c8_extraction() {
  const int ppp = 20;
  const double amp = kPi, phase = 0.3;
  std::vector<double> tone, noisy, dc, harmonic;
  for (int n = 0; n < 3 * ppp; ++n) {
    const double th = kTwoPi * n / ppp;
    tone.push_back(amp * std::cos(th + phase));
    noisy.push_back(amp * std::cos(th + phase) + 5.0 + 0.4 * std::cos(2.0 * th));
    dc.push_back(5.0);
    harmonic.push_back(std::cos(2.0 * th));
  }
  expect(std::abs(single_bin_amplitude(tone, ppp) / amp - 1.0) <= 1e-12, "pure tone not recovered");
  expect(std::abs(single_bin_amplitude(noisy, ppp) / amp - 1.0) <= 1e-12,
         "tone under DC + harmonic not recovered");
  expect(single_bin_amplitude(dc, ppp) <= 1e-12, "DC leaks into the bin");
  expect(single_bin_amplitude(harmonic, ppp) <= 1e-12, "second harmonic leaks into the bin");
}

void c9_metrics() {
  const GridSpec g = grid_of({8, 8, 8}, 1.0);
  std::mt19937 rng(412);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  const auto random_field = [&]() {
    ScalarField3D f(g, Unit::Pressure);
    for (auto& v : f.values) v = dist(rng);
    return f;
  };

  const auto gt = random_field();
  ScalarField3D zero(g, Unit::Pressure);
  expect(relative_l2(gt, gt) == 0.0, "relative_l2(gt,gt) != 0");
  expect(std::abs(relative_l2(zero, gt) - 1.0) <= 1e-12, "relative_l2(0,gt) != 1");
  auto twice = gt;
  for (auto& v : twice.values) v *= 2.0f;
  expect(std::abs(relative_l2(twice, gt) - 1.0) <= 1e-6, "relative_l2(2gt,gt) != 1");

  ScalarField3D a(grid_of({20, 20, 20}, 1.0), Unit::Pressure);
  ScalarField3D b = a;
  a.at(13, 14, 10) = 1.0f;
  b.at(10, 10, 10) = 1.0f;
  const double fpe = focal_position_error(a, b, {0.5, 0.5, 0.5});
  expect(fpe == 2.5, "focal example = " + fmt(fpe) + ", want 2.5");

  auto pred = gt;
  ScalarField3D one(g, Unit::Pressure, 0.0f);
  one.values[0] = 1.0f;
  auto pred08 = one;
  pred08.values[0] = 0.8f;  // float32 storage: 0.8f carries ~1e-8 rounding
  expect(std::abs(max_pressure_error(pred08, one) - 20.0) <= 1e-4, "max pressure 0.8 vs 1 != 20 %");
  auto gt2 = one;
  for (auto& v : gt2.values) v *= 2.0f;
  expect(std::abs(max_pressure_error(gt2, one) - 100.0) <= 1e-6, "max pressure 2x != 100 %");

  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_field();
    const auto y = random_field();
    double mse = 0.0;
    for (std::size_t i = 0; i < x.values.size(); ++i) {
      const double d = double(x.values[i]) - double(y.values[i]);
      mse += d * d;
    }
    mse /= double(x.values.size());
    worst = std::max(worst, std::abs(weighted_mse(x, y, 0.0) - mse));
  }
  expect(worst <= 1e-9, "alpha=0 weighted mse deviates from plain mse by " + fmt(worst));

  auto ramp = gt;
  for (int k = 0; k < 8; ++k)
    for (int j = 0; j < 8; ++j)
      for (int i = 0; i < 8; ++i) ramp.at(i, j, k) += 0.125f * i;
  expect(std::abs(gradient_loss(ramp, gt) - 0.125 * 0.125 / 3.0) <= 1e-9,
         "x-ramp gradient loss != s^2/3");

  MetricParams mp;
  mp.lambda = 0.0;
  expect(composite_loss(pred, gt, mp) == weighted_mse(pred, gt, mp.alpha_weight),
         "lambda=0 composite != weighted mse");

  const auto s = summarize_values({1.0, 2.0, 3.0});
  expect(s.median == 2.0 && s.mean == 2.0, "summarize {1,2,3} median/mean wrong");
  expect(std::abs(s.std_dev - 0.816496580927726) <= 1e-9, "population std wrong");
  const auto single = summarize_values({4.0});
  expect(single.median == 4.0 && single.mean == 4.0 && single.std_dev == 0.0,
         "single-sample summary wrong");
}

void c10_phantom_run() {
  GridSpec g = grid_of({64, 64, 64});
  const ScalarField3D skull = make_skull_phantom(g, 12.0, 3.0, 1700.0f);
  const ScalarField3D water(g, Unit::HU, 0.0f);
  const fs::path skull_ct = g_dir / "skull_ct.npz";
  const fs::path water_ct = g_dir / "water_ct.npz";
  write_volume_npz(skull_ct.string(), skull);
  write_volume_npz(water_ct.string(), water);

  SimConfig cfg;
  cfg.subject_id = "phantom";
  cfg.crop_size = 48;
  cfg.t_end_override = 4e-5;
  cfg.transducer.position = {16.0, 16.0, 2.0};
  cfg.transducer.focus = {16.0, 16.0, 16.0};
  cfg.transducer.roc = 14.0;
  cfg.transducer.diameter = 12.0;
  cfg.transducer.f0 = cfg.f0;
  cfg.transducer.amplitude = 60e3;

  SimConfig water_cfg = cfg;
  water_cfg.ct_path = water_ct.string();
  water_cfg.output_path = (g_dir / "water_run.npz").string();
  SimConfig skull_cfg = cfg;
  skull_cfg.ct_path = skull_ct.string();
  skull_cfg.output_path = (g_dir / "skull_run.npz").string();

  const RunArtifacts water_art = run_simulation(water_cfg);
  const RunArtifacts skull_art = run_simulation(skull_cfg);
  const std::string skull_bytes = slurp(skull_art.npz_path);
  (void)run_simulation(skull_cfg);
  expect(slurp(skull_art.npz_path) == skull_bytes, "repeated skull run is not bit-identical");

  const auto peak_of = [](const std::string& path, Index3 offset) {
    const npy::Entries entries = npy::read_npz(path);
    const auto it = std::find_if(entries.begin(), entries.end(),
                                 [](const auto& e) { return e.first == "pressure"; });
    if (it == entries.end()) throw FormatError("pressure member missing in " + path);
    const std::vector<float> p = it->second.as<float>();
    std::size_t arg = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
      if (p[i] > p[arg]) arg = i;
    GridSpec crop;
    crop.dims = {48, 48, 48};
    const Index3 local = crop.unlinear(arg);
    return std::pair<Index3, float>(
        {local[0] + offset[0], local[1] + offset[1], local[2] + offset[2]}, p[arg]);
  };
  const auto [water_peak, water_amp] = peak_of(water_art.npz_path, water_art.crop_offset);
  const auto [skull_peak, skull_amp] = peak_of(skull_art.npz_path, skull_art.crop_offset);

  const double shift_mm = 0.5 * std::sqrt(double(
      (water_peak[0] - skull_peak[0]) * (water_peak[0] - skull_peak[0]) +
      (water_peak[1] - skull_peak[1]) * (water_peak[1] - skull_peak[1]) +
      (water_peak[2] - skull_peak[2]) * (water_peak[2] - skull_peak[2])));
  const double attenuation = 1.0 - double(skull_amp) / double(water_amp);
  expect(shift_mm > 0.0, "skull focal shift is zero");
  expect(attenuation > 0.0, "skull amplitude attenuation " + fmt(attenuation) + " not positive");

  g_water_npz = water_art.npz_path;
}

void c11_npz_interop() {
  const fs::path dir = g_dir / "interop";
  fs::create_directories(dir);

  // (a) numpy-authored fixture with the released-dataset member layout
  const fs::path fixture = dir / "fixture.npz";
  int rc = oracle::run_python(
      "import numpy as np\n"
      "ct = (np.arange(512) % 97).astype('float32').reshape(8, 8, 8)\n"
      "p = (np.arange(512) * 0.25).astype('float32').reshape(8, 8, 8)\n"
      "tc = (np.arange(150, dtype='float64') * 0.5).reshape(50, 3)\n"
      "np.savez_compressed(r'" + fixture.string() + "', ct_crop=ct, pressure=p, "
      "transducer_coords=tc)\n");
  expect(rc == 0, "python fixture writer failed");
  if (rc == 0) {
    const npy::Entries entries = npy::read_npz(fixture.string());
    expect(entries.size() == 3, "fixture member count != 3");
    bool ok = true;
    for (const auto& [name, arr] : entries) {
      if (name == "ct_crop") {
        const auto v = arr.as<float>();
        ok = ok && arr.shape == std::vector<std::size_t>{8, 8, 8};
        for (std::size_t i = 0; i < v.size(); ++i) ok = ok && v[i] == float(i % 97);
      } else if (name == "pressure") {
        const auto v = arr.as<float>();
        for (std::size_t i = 0; i < v.size(); ++i)
          ok = ok && v[i] == static_cast<float>(double(i) * 0.25);
      } else if (name == "transducer_coords") {
        const auto v = arr.as<double>();
        ok = ok && arr.shape == std::vector<std::size_t>{50, 3};
        for (std::size_t i = 0; i < v.size(); ++i) ok = ok && v[i] == double(i) * 0.5;
      }
    }
    expect(ok, "numpy-authored fixture values do not round-trip");

    // (b) our writer, re-read by numpy
    npy::Entries out;
    for (const auto& [name, arr] : entries) out.emplace_back(name, arr);
    const fs::path ours = dir / "ours.npz";
    npy::write_npz(ours.string(), out, true);
    rc = oracle::run_python(
        "import numpy as np, sys\n"
        "a = np.load(r'" + fixture.string() + "')\n"
        "b = np.load(r'" + ours.string() + "')\n"
        "assert sorted(a.files) == sorted(b.files)\n"
        "for k in a.files:\n"
        "    assert a[k].dtype == b[k].dtype and a[k].shape == b[k].shape\n"
        "    assert np.array_equal(a[k], b[k])\n");
    expect(rc == 0, "numpy cannot reproduce our npz bit-for-bit");
  }

  // (c) the pipeline artifact from criterion 10, read back by numpy bit-exactly
  if (g_water_npz.empty()) {
    expect(false, "no pipeline artifact available (criterion 10 did not complete)");
    return;
  }
  const fs::path raw = dir / "pressure.bin";
  rc = oracle::run_python(
      "import numpy as np\n"
      "d = np.load(r'" + g_water_npz + "')\n"
      "arr = d['pressure']\n"
      "assert arr.dtype == np.float32 and arr.shape == (48, 48, 48)\n"
      "open(r'" + raw.string() + "', 'wb').write(arr.tobytes())\n");
  expect(rc == 0, "numpy failed to read the pipeline artifact");
  if (rc == 0) {
    const std::string bytes = slurp(raw);
    const npy::Entries entries = npy::read_npz(g_water_npz);
    const auto it = std::find_if(entries.begin(), entries.end(),
                                 [](const auto& e) { return e.first == "pressure"; });
    expect(it != entries.end(), "pressure member missing");
    if (it != entries.end()) {
      const std::vector<float> v = it->second.as<float>();
      expect(bytes.size() == v.size() * sizeof(float) &&
                 std::memcmp(bytes.data(), v.data(), bytes.size()) == 0,
             "numpy and native reads of the artifact differ");
    }
  }
}

void c12_steady_state() {
  if (!g_c4_done) {
    expect(false, "prerequisite criterion 4 did not complete");
    return;
  }
  const double change = std::abs(g_focal_amp6 - g_focal_amp3) / g_focal_amp3;
  expect(change < 0.01,
         "3 -> 6 period focal amplitude change " + fmt(change * 100) + " %, want < 1 %");
}

}  // namespace

int main() {
  g_dir = oracle::temp_dir("acceptance");
  std::printf("acceptance suite\n");

  criterion(1, "discretization constants (dx, ppp, dt)", c1_discretization);
  criterion(2, "hounsfield mapping endpoints", c2_hu_mapping);
  criterion(3, "homogeneous dispersion, 64^3 water, 200 steps", c3_dispersion);
  criterion(4, "focused bowl vs rayleigh oracle, 128^3 water", c4_focused_bowl);
  criterion(5, "power-law absorption decay over 20 mm", c5_absorption);
  criterion(6, "pml reflection <= -30 dB vs double domain", c6_pml_reflection);
  criterion(7, "pml thickness search vs factorization oracle", c7_pml_sizing);
  criterion(8, "single-bin amplitude extraction", c8_extraction);
  criterion(9, "metric suite worked examples", c9_metrics);
  criterion(10, "end-to-end skull phantom vs water run", c10_phantom_run);
  criterion(11, "npz interop with numpy", c11_npz_interop);
  criterion(12, "steady-state convergence, 3 vs 6 periods", c12_steady_state);

  std::error_code ec;
  fs::remove_all(g_dir, ec);
  std::printf("acceptance: %d/12 passed\n", 12 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
