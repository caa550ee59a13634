// SPDX-License-Identifier: Apache-2.0
//
// Independent cross-checks used by the unit and acceptance tests. Everything
// here is computed from first principles (quadrature, closed forms) without
// touching the library's own discretisations, so agreement is meaningful.

#pragma once

#include <filesystem>
#include <string>

#include "tfus/transducer.hpp"
#include "tfus/types.hpp"

namespace oracle {

// Rayleigh integral p(x) = (i k A / 2pi) * surface integral of e^{ikR}/R over
// the spherical cap, evaluated with a theta x phi midpoint rule in the bowl's
// local frame. Returns |p| in Pa for an observation point in mm (world).
double rayleigh_bowl_amplitude(const tfus::BowlTransducer& t, double c_m_per_s,
                               const tfus::Vec3& point_mm, int n_theta = 256,
                               int n_phi = 512);

// Closed-form |p| on the bowl axis. zeta_mm is the signed offset from the
// centre of curvature, negative towards the apex.
double axial_bowl_amplitude(const tfus::BowlTransducer& t, double c_m_per_s,
                            double zeta_mm);

// Densely scans [lo_mm, hi_mm] on the axis and returns the zeta of max |p|.
double axial_peak_zeta(const tfus::BowlTransducer& t, double c_m_per_s,
                       double lo_mm, double hi_mm, int n = 200001);

// Plane-wave amplitude ratio after distance_m of power-law material:
// 10^(-alpha_dB_per_m * d / 20) with alpha in dB/(MHz^y cm) at f0.
double powerlaw_decay(double alpha_db_cm_mhz, double y, double f0_hz,
                      double distance_m);

// Runs a python3 snippet from a temp file; returns the process exit status
// (0 on success, negative if the interpreter could not be launched).
int run_python(const std::string& code);

// Fresh private scratch directory under the system temp root.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace oracle
