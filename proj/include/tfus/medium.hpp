// SPDX-License-Identifier: Apache-2.0
//
// Hounsfield-unit to acoustic-property conversion. Density is a linear map
// of HU, sound speed a linear map of density, and absorption follows a
// square-root law that assigns the strongest absorption to the least dense
// bone. Voxels below the water threshold are treated as water.

#pragma once

#include "tfus/types.hpp"

namespace tfus {

struct HuMappingParams {
  double rho_min = 1000.0;   // kg/m^3
  double rho_max = 1900.0;
  double c_min = 1500.0;     // m/s
  double c_max = 3100.0;
  double alpha_min = 4.0;    // dB/(MHz^y cm)
  double alpha_max = 8.7;
  double hu_min = 300.0;
  double hu_max = 2000.0;
  double alpha_power = 1.1;  // y

  void validate() const;
};

struct AcousticMedium {
  ScalarField3D rho;     // kg/m^3
  ScalarField3D c;       // m/s
  ScalarField3D alpha0;  // dB/(MHz^y cm)
  double alpha_power = 1.1;
  double c_ref = 0.0;    // m/s, max sound speed of the medium

  const GridSpec& grid() const { return rho.grid; }
  bool lossless() const;
  void validate() const;
};

double hu_to_density(double hu, const HuMappingParams& p);
double density_to_sound_speed(double rho, const HuMappingParams& p);
double hu_to_absorption(double hu, const HuMappingParams& p);

// Voxels with HU below water_threshold get water properties (rho_min, c_min,
// zero absorption); the rest follow the HU mappings. c_ref = max(c).
AcousticMedium build_medium(const ScalarField3D& ct, const HuMappingParams& p,
                            double water_threshold);

// Uniform water medium on the given grid (convenience for tests and water
// reference runs).
AcousticMedium make_water_medium(const GridSpec& grid, const HuMappingParams& p = {});

// Converts the power-law prefactor from dB/(MHz^y cm) to Np (rad/s)^-y / m,
// the units used by the absorption operators.
double absorption_to_nepers(double alpha_db, double y);

}  // namespace tfus
