// SPDX-License-Identifier: Apache-2.0

#include "tfus/types.hpp"

#include <limits>
#include <sstream>

namespace tfus {

const char* unit_label(Unit u) {
  switch (u) {
    case Unit::HU: return "HU";
    case Unit::Density: return "kg/m^3";
    case Unit::SoundSpeed: return "m/s";
    case Unit::Absorption: return "dB/(MHz^y cm)";
    case Unit::Pressure: return "Pa";
    case Unit::Dimensionless: return "1";
  }
  return "?";
}

void GridSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) {
      throw ArgumentError("grid dims must be positive, got " + to_string(*this));
    }
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      throw ArgumentError("grid spacing must be positive and finite, got " + to_string(*this));
    }
    if (!std::isfinite(origin[a])) {
      throw ArgumentError("grid origin must be finite");
    }
  }
}

void ScalarField3D::validate() const {
  grid.validate();
  if (values.size() != grid.voxel_count()) {
    std::ostringstream os;
    os << "field size " << values.size() << " does not match grid " << to_string(grid);
    throw ArgumentError(os.str());
  }
}

void ScalarField3D::require_finite() const {
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (!std::isfinite(values[n])) {
      const Index3 ijk = grid.unlinear(n);
      std::ostringstream os;
      os << "non-finite value at voxel (" << ijk[0] << "," << ijk[1] << "," << ijk[2] << ")";
      throw FormatError(os.str());
    }
  }
}

float ScalarField3D::min_value() const {
  float m = std::numeric_limits<float>::infinity();
  for (float v : values) m = std::min(m, v);
  return m;
}

float ScalarField3D::max_value() const {
  float m = -std::numeric_limits<float>::infinity();
  for (float v : values) m = std::max(m, v);
  return m;
}

std::size_t ScalarField3D::argmax() const {
  std::size_t best = 0;
  float best_v = -std::numeric_limits<float>::infinity();
  for (std::size_t n = 0; n < values.size(); ++n) {
    if (values[n] > best_v) {
      best_v = values[n];
      best = n;
    }
  }
  return best;
}

std::string to_string(const GridSpec& g) {
  std::ostringstream os;
  os << "[" << g.dims[0] << "x" << g.dims[1] << "x" << g.dims[2] << " @ (" << g.spacing[0] << ","
     << g.spacing[1] << "," << g.spacing[2] << ") mm]";
  return os.str();
}

}  // namespace tfus
