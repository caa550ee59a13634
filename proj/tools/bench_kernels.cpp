// SPDX-License-Identifier: Apache-2.0
//
// Times the OpenMP kernels against the serial reference loops on identical
// inputs and reports speedup plus the largest result difference.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tfus/kernels.hpp"
#include "tfus/prng.hpp"
#include "tfus/types.hpp"

namespace {

using Clock = std::chrono::steady_clock;

std::vector<float> random_volume(tfus::SplitMix64& rng, std::size_t n, double lo = -1.0,
                                 double hi = 1.0) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

double max_diff(const std::vector<float>& a, const std::vector<float>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, static_cast<double>(std::abs(a[i] - b[i])));
  }
  return m;
}

// Runs fn(dst) `reps` times on a fresh copy of `init` and returns the best
// wall time; dst holds the last result.
template <typename F>
double time_best(int reps, std::vector<float>& dst, const std::vector<float>& init, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    dst = init;
    const auto t0 = Clock::now();
    fn(dst);
    best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial_s, double omp_s, double diff) {
  std::printf("%-18s serial %8.3f ms   omp %8.3f ms   speedup %5.2fx   max diff %g\n", name,
              serial_s * 1e3, omp_s * 1e3, serial_s / omp_s, diff);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel benchmark: OpenMP vs serial reference"};
  int size = 128, reps = 5;
  std::uint64_t seed = 42;
  app.add_option("--size", size, "Cube edge in voxels")->check(CLI::PositiveNumber);
  app.add_option("--reps", reps, "Repetitions, best-of timing")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Input PRNG seed");
  CLI11_PARSE(app, argc, argv);

  const tfus::Index3 dims = {size, size, size};
  const std::size_t n = static_cast<std::size_t>(size) * size * size;
  tfus::SplitMix64 rng(seed);

  const auto field = random_volume(rng, n);
  const auto grad = random_volume(rng, n);
  const auto coef = random_volume(rng, n, 0.5, 2.0);
  const auto rx = random_volume(rng, n);
  const auto ry = random_volume(rng, n);
  const auto rz = random_volume(rng, n);
  std::vector<float> pml(static_cast<std::size_t>(size));
  for (auto& x : pml) x = static_cast<float>(rng.uniform(0.9, 1.0));

  std::printf("cube %d^3, %zu voxels, best of %d\n", size, n, reps);

  std::vector<float> out_s(n), out_p(n);
  {
    const double ts = time_best(reps, out_s, field, [&](std::vector<float>& u) {
      tfus::kernels::serial::velocity_update(u.data(), grad.data(), coef.data(), pml.data(), 1,
                                             dims);
    });
    const double tp = time_best(reps, out_p, field, [&](std::vector<float>& u) {
      tfus::kernels::velocity_update(u.data(), grad.data(), coef.data(), pml.data(), 1, dims);
    });
    report("velocity_update", ts, tp, max_diff(out_s, out_p));
  }
  {
    const double ts = time_best(reps, out_s, field, [&](std::vector<float>& r) {
      tfus::kernels::serial::density_update(r.data(), grad.data(), coef.data(), pml.data(), 0,
                                            dims);
    });
    const double tp = time_best(reps, out_p, field, [&](std::vector<float>& r) {
      tfus::kernels::density_update(r.data(), grad.data(), coef.data(), pml.data(), 0, dims);
    });
    report("density_update", ts, tp, max_diff(out_s, out_p));
  }
  {
    const double ts = time_best(reps, out_s, field, [&](std::vector<float>& p) {
      tfus::kernels::serial::pressure_lossless(p.data(), rx.data(), ry.data(), rz.data(),
                                               coef.data(), n);
    });
    const double tp = time_best(reps, out_p, field, [&](std::vector<float>& p) {
      tfus::kernels::pressure_lossless(p.data(), rx.data(), ry.data(), rz.data(), coef.data(), n);
    });
    report("pressure_lossless", ts, tp, max_diff(out_s, out_p));
  }
  {
    const double ts = time_best(reps, out_s, field, [&](std::vector<float>& p) {
      tfus::kernels::serial::pressure_absorbing(p.data(), rx.data(), ry.data(), rz.data(),
                                                coef.data(), grad.data(), field.data(),
                                                ry.data(), rz.data(), n);
    });
    const double tp = time_best(reps, out_p, field, [&](std::vector<float>& p) {
      tfus::kernels::pressure_absorbing(p.data(), rx.data(), ry.data(), rz.data(), coef.data(),
                                        grad.data(), field.data(), ry.data(), rz.data(), n);
    });
    report("pressure_absorbing", ts, tp, max_diff(out_s, out_p));
  }
  {
    const double ts = time_best(reps, out_s, field, [&](std::vector<float>& o) {
      tfus::kernels::serial::sum3(o.data(), rx.data(), ry.data(), rz.data(), n);
    });
    const double tp = time_best(reps, out_p, field, [&](std::vector<float>& o) {
      tfus::kernels::sum3(o.data(), rx.data(), ry.data(), rz.data(), n);
    });
    report("sum3", ts, tp, max_diff(out_s, out_p));
  }
  {
    float ms = 0.0f, mp = 0.0f;
    const double ts = time_best(reps, out_s, field, [&](std::vector<float>& v) {
      ms = tfus::kernels::serial::max_abs(v.data(), n);
    });
    const double tp = time_best(reps, out_p, field, [&](std::vector<float>& v) {
      mp = tfus::kernels::max_abs(v.data(), n);
    });
    report("max_abs", ts, tp, std::abs(static_cast<double>(ms) - mp));
  }
  return 0;
}
