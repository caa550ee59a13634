// SPDX-License-Identifier: Apache-2.0

#include "tfus/medium.hpp"

#include <algorithm>
#include <cmath>

namespace tfus {

void HuMappingParams::validate() const {
  if (!(rho_min < rho_max)) throw ArgumentError("hu mapping requires rho_min < rho_max");
  if (!(c_min < c_max)) throw ArgumentError("hu mapping requires c_min < c_max");
  if (!(alpha_min < alpha_max)) throw ArgumentError("hu mapping requires alpha_min < alpha_max");
  if (!(hu_min < hu_max)) throw ArgumentError("hu mapping requires hu_min < hu_max");
  if (!(rho_min > 0.0) || !(c_min > 0.0) || alpha_min < 0.0) {
    throw ArgumentError("hu mapping endpoints must be positive");
  }
  if (!(alpha_power > 0.0)) throw ArgumentError("alpha_power must be positive");
  if (std::abs(alpha_power - 1.0) < 1e-9) {
    throw ArgumentError(
        "alpha_power = 1 is singular in the power-law absorption operator "
        "(tan(pi*y/2) term); use e.g. 1.1");
  }
}

bool AcousticMedium::lossless() const {
  for (float a : alpha0.values) {
    if (a != 0.0f) return false;
  }
  return true;
}

void AcousticMedium::validate() const {
  rho.validate();
  c.validate();
  alpha0.validate();
  if (!(rho.grid == c.grid) || !(rho.grid == alpha0.grid)) {
    throw ArgumentError("medium property fields must share one grid");
  }
  for (float r : rho.values) {
    if (!(r > 0.0f)) throw ArgumentError("medium density must be positive everywhere");
  }
  if (c_ref < c.max_value()) throw ArgumentError("medium c_ref must be >= max sound speed");
  if (!(alpha_power > 0.0) || std::abs(alpha_power - 1.0) < 1e-9) {
    throw ArgumentError("medium alpha_power invalid (must be positive and != 1)");
  }
}

double hu_to_density(double hu, const HuMappingParams& p) {
  const double h = std::clamp(hu, 0.0, p.hu_max);
  return p.rho_min + (p.rho_max - p.rho_min) * h / p.hu_max;
}

double density_to_sound_speed(double rho, const HuMappingParams& p) {
  if (rho < p.rho_min - 1e-9 || rho > p.rho_max + 1e-9) {
    throw ArgumentError("density " + std::to_string(rho) + " outside mapping range");
  }
  return p.c_min + (p.c_max - p.c_min) * (rho - p.rho_min) / (p.rho_max - p.rho_min);
}

double hu_to_absorption(double hu, const HuMappingParams& p) {
  const double h = std::clamp(hu, p.hu_min, p.hu_max);
  const double radical = std::sqrt((h - p.hu_min) / (p.hu_max - p.hu_min));
  return p.alpha_min + (p.alpha_max - p.alpha_min) * (1.0 - radical);
}

AcousticMedium build_medium(const ScalarField3D& ct, const HuMappingParams& p,
                            double water_threshold) {
  ct.validate();
  p.validate();
  AcousticMedium m;
  m.rho = ScalarField3D(ct.grid, Unit::Density);
  m.c = ScalarField3D(ct.grid, Unit::SoundSpeed);
  m.alpha0 = ScalarField3D(ct.grid, Unit::Absorption);
  m.alpha_power = p.alpha_power;

  const std::size_t n = ct.values.size();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(n); ++idx) {
    const double hu = ct.values[idx];
    if (hu < water_threshold) {
      m.rho.values[idx] = static_cast<float>(p.rho_min);
      m.c.values[idx] = static_cast<float>(p.c_min);
      m.alpha0.values[idx] = 0.0f;
    } else {
      const double rho = hu_to_density(hu, p);
      m.rho.values[idx] = static_cast<float>(rho);
      m.c.values[idx] = static_cast<float>(density_to_sound_speed(rho, p));
      m.alpha0.values[idx] = static_cast<float>(hu_to_absorption(hu, p));
    }
  }
  m.c_ref = m.c.max_value();
  return m;
}

AcousticMedium make_water_medium(const GridSpec& grid, const HuMappingParams& p) {
  ScalarField3D ct(grid, Unit::HU, 0.0f);
  return build_medium(ct, p, p.hu_min);
}

double absorption_to_nepers(double alpha_db, double y) {
  // dB/(MHz^y cm) -> Np (rad/s)^-y / m:
  //   * 100 converts per-cm to per-m
  //   * (1e-6 / 2pi)^y converts the frequency base from MHz to rad/s
  //   * 20 log10(e) converts dB to nepers
  constexpr double kTwoPi = 6.283185307179586;
  const double db_to_np = 20.0 * std::log10(std::exp(1.0));
  return 100.0 * alpha_db * std::pow(1e-6 / kTwoPi, y) / db_to_np;
}

}  // namespace tfus
