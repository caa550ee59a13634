// SPDX-License-Identifier: Apache-2.0

#include "tfus/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

namespace tfus {
namespace {

void reject_unknown_keys(const YAML::Node& node, const std::string& section,
                         std::initializer_list<const char*> allowed) {
  if (!node.IsDefined()) return;
  if (!node.IsMap()) throw ArgumentError(section + " must be a mapping");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!ok.count(key)) {
      throw ArgumentError("unknown key '" + key + "' in " + section);
    }
  }
}

template <typename T>
T get_or(const YAML::Node& node, const char* key, T fallback) {
  const YAML::Node v = node[key];
  if (!v.IsDefined()) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw ArgumentError(std::string("cannot parse value for '") + key + "'");
  }
}

template <typename T>
T require(const YAML::Node& node, const std::string& section, const char* key) {
  const YAML::Node v = node[key];
  if (!v.IsDefined()) {
    throw ArgumentError("missing required key '" + std::string(key) + "' in " + section);
  }
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw ArgumentError(std::string("cannot parse value for '") + key + "'");
  }
}

Vec3 require_vec3(const YAML::Node& node, const std::string& section, const char* key) {
  const YAML::Node v = node[key];
  if (!v.IsDefined()) {
    throw ArgumentError("missing required key '" + std::string(key) + "' in " + section);
  }
  if (!v.IsSequence() || v.size() != 3) {
    throw ArgumentError(std::string("'") + key + "' must be a sequence of 3 numbers");
  }
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = v[i].as<double>();
    } catch (const YAML::Exception&) {
      throw ArgumentError(std::string("cannot parse value for '") + key + "'");
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt_vec3(const Vec3& v) {
  return "[" + fmt(v[0]) + ", " + fmt(v[1]) + ", " + fmt(v[2]) + "]";
}

}  // namespace

void SimConfig::validate() const {
  if (schema_version != 1) {
    throw ArgumentError("schema_version must be 1, got " + std::to_string(schema_version));
  }
  if (subject_id.empty()) throw ArgumentError("subject_id must not be empty");
  if (ct_path.empty()) throw ArgumentError("ct_path must not be empty");
  if (output_path.empty()) throw ArgumentError("output_path must not be empty");
  if (!(f0 > 0.0)) throw ArgumentError("f0_hz must be positive");
  if (!(ppw >= 2.0)) throw ArgumentError("ppw must be at least 2");
  if (!(cfl > 0.0 && cfl <= 0.5)) throw ArgumentError("cfl must be in (0, 0.5]");
  if (n_record_periods < 1) throw ArgumentError("n_record_periods must be at least 1");
  if (crop_size < 1) throw ArgumentError("crop_size must be at least 1");
  if (!(t_end_override >= 0.0)) throw ArgumentError("t_end_override_s must be non-negative");
  if (!std::isfinite(water_threshold)) throw ArgumentError("water_threshold_hu must be finite");
  if (pml.thickness < 0) throw ArgumentError("pml.thickness must be non-negative");
  if (pml.lo < 0 || pml.hi < pml.lo) {
    throw ArgumentError("pml.min/pml.max must satisfy 0 <= min <= max");
  }

  if (!(transducer.roc > 0.0)) throw ArgumentError("transducer.roc_mm must be positive");
  if (!(transducer.diameter > 0.0) || transducer.diameter > 2.0 * transducer.roc) {
    throw ArgumentError(
        "transducer.diameter_mm must be positive and at most twice transducer.roc_mm");
  }
  const double gap = std::abs(norm(transducer.focus - transducer.position) - transducer.roc);
  if (gap > 1e-6 * std::max(1.0, transducer.roc)) {
    throw ArgumentError(
        "transducer.focus_mm must lie at distance transducer.roc_mm from "
        "transducer.position_mm");
  }
  if (!(transducer.amplitude >= 0.0)) {
    throw ArgumentError("transducer.amplitude_pa must be non-negative");
  }
  if (!(transducer.ramp_cycles >= 0.0)) {
    throw ArgumentError("transducer.ramp_cycles must be non-negative");
  }
  if (std::abs(transducer.f0 - f0) > 1e-9 * f0) {
    throw ArgumentError("transducer drive frequency must equal the top-level f0_hz");
  }
  try {
    hu_mapping.validate();
  } catch (const ArgumentError& e) {
    throw ArgumentError(std::string("hu_mapping: ") + e.what());
  }
}

SimConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw FormatError(std::string("invalid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ArgumentError("config root must be a mapping");

  reject_unknown_keys(root, "config",
                      {"schema_version", "subject_id", "ct_path", "output_path", "seed",
                       "f0_hz", "ppw", "cfl", "n_record_periods", "crop_size",
                       "t_end_override_s", "water_threshold_hu", "pml", "transducer",
                       "hu_mapping"});

  SimConfig c;
  if (!root["schema_version"].IsDefined()) {
    throw ArgumentError("missing required key 'schema_version' in config");
  }
  c.schema_version = require<int>(root, "config", "schema_version");
  c.subject_id = require<std::string>(root, "config", "subject_id");
  c.ct_path = require<std::string>(root, "config", "ct_path");
  c.output_path = require<std::string>(root, "config", "output_path");
  c.seed = get_or<unsigned long long>(root, "seed", 0ull);
  c.f0 = get_or<double>(root, "f0_hz", c.f0);
  c.ppw = get_or<double>(root, "ppw", c.ppw);
  c.cfl = get_or<double>(root, "cfl", c.cfl);
  c.n_record_periods = get_or<int>(root, "n_record_periods", c.n_record_periods);
  c.crop_size = get_or<int>(root, "crop_size", c.crop_size);
  c.t_end_override = get_or<double>(root, "t_end_override_s", c.t_end_override);
  c.water_threshold = get_or<double>(root, "water_threshold_hu", c.water_threshold);

  const YAML::Node pml = root["pml"];
  if (pml.IsDefined()) {
    reject_unknown_keys(pml, "pml", {"mode", "thickness", "min", "max"});
    const std::string mode = get_or<std::string>(pml, "mode", "auto");
    if (mode == "fixed") {
      c.pml.fixed = true;
    } else if (mode == "auto") {
      c.pml.fixed = false;
    } else {
      throw ArgumentError("pml.mode must be 'auto' or 'fixed', got '" + mode + "'");
    }
    c.pml.thickness = get_or<int>(pml, "thickness", c.pml.thickness);
    c.pml.lo = get_or<int>(pml, "min", c.pml.lo);
    c.pml.hi = get_or<int>(pml, "max", c.pml.hi);
  }

  const YAML::Node td = root["transducer"];
  if (!td.IsDefined()) throw ArgumentError("missing required section 'transducer'");
  reject_unknown_keys(td, "transducer",
                      {"position_mm", "focus_mm", "roc_mm", "diameter_mm", "amplitude_pa",
                       "phase_rad", "ramp_cycles"});
  c.transducer.position = require_vec3(td, "transducer", "position_mm");
  c.transducer.focus = require_vec3(td, "transducer", "focus_mm");
  c.transducer.roc = require<double>(td, "transducer", "roc_mm");
  c.transducer.diameter = require<double>(td, "transducer", "diameter_mm");
  c.transducer.amplitude = get_or<double>(td, "amplitude_pa", 60000.0);
  c.transducer.phase = get_or<double>(td, "phase_rad", 0.0);
  c.transducer.ramp_cycles = get_or<double>(td, "ramp_cycles", 2.0);
  c.transducer.f0 = c.f0;

  const YAML::Node hu = root["hu_mapping"];
  if (hu.IsDefined()) {
    reject_unknown_keys(hu, "hu_mapping",
                        {"rho_min", "rho_max", "c_min", "c_max", "alpha_min", "alpha_max",
                         "hu_min", "hu_max", "alpha_power"});
    c.hu_mapping.rho_min = get_or<double>(hu, "rho_min", c.hu_mapping.rho_min);
    c.hu_mapping.rho_max = get_or<double>(hu, "rho_max", c.hu_mapping.rho_max);
    c.hu_mapping.c_min = get_or<double>(hu, "c_min", c.hu_mapping.c_min);
    c.hu_mapping.c_max = get_or<double>(hu, "c_max", c.hu_mapping.c_max);
    c.hu_mapping.alpha_min = get_or<double>(hu, "alpha_min", c.hu_mapping.alpha_min);
    c.hu_mapping.alpha_max = get_or<double>(hu, "alpha_max", c.hu_mapping.alpha_max);
    c.hu_mapping.hu_min = get_or<double>(hu, "hu_min", c.hu_mapping.hu_min);
    c.hu_mapping.hu_max = get_or<double>(hu, "hu_max", c.hu_mapping.hu_max);
    c.hu_mapping.alpha_power = get_or<double>(hu, "alpha_power", c.hu_mapping.alpha_power);
  }

  c.validate();
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string dump_config(const SimConfig& c) {
  std::ostringstream out;
  out << "schema_version: " << c.schema_version << "\n";
  out << "subject_id: " << c.subject_id << "\n";
  out << "ct_path: " << c.ct_path << "\n";
  out << "output_path: " << c.output_path << "\n";
  out << "seed: " << c.seed << "\n";
  out << "f0_hz: " << fmt(c.f0) << "\n";
  out << "ppw: " << fmt(c.ppw) << "\n";
  out << "cfl: " << fmt(c.cfl) << "\n";
  out << "n_record_periods: " << c.n_record_periods << "\n";
  out << "crop_size: " << c.crop_size << "\n";
  out << "t_end_override_s: " << fmt(c.t_end_override) << "\n";
  out << "water_threshold_hu: " << fmt(c.water_threshold) << "\n";
  out << "pml:\n";
  out << "  mode: " << (c.pml.fixed ? "fixed" : "auto") << "\n";
  out << "  thickness: " << c.pml.thickness << "\n";
  out << "  min: " << c.pml.lo << "\n";
  out << "  max: " << c.pml.hi << "\n";
  out << "transducer:\n";
  out << "  position_mm: " << fmt_vec3(c.transducer.position) << "\n";
  out << "  focus_mm: " << fmt_vec3(c.transducer.focus) << "\n";
  out << "  roc_mm: " << fmt(c.transducer.roc) << "\n";
  out << "  diameter_mm: " << fmt(c.transducer.diameter) << "\n";
  out << "  amplitude_pa: " << fmt(c.transducer.amplitude) << "\n";
  out << "  phase_rad: " << fmt(c.transducer.phase) << "\n";
  out << "  ramp_cycles: " << fmt(c.transducer.ramp_cycles) << "\n";
  out << "hu_mapping:\n";
  out << "  rho_min: " << fmt(c.hu_mapping.rho_min) << "\n";
  out << "  rho_max: " << fmt(c.hu_mapping.rho_max) << "\n";
  out << "  c_min: " << fmt(c.hu_mapping.c_min) << "\n";
  out << "  c_max: " << fmt(c.hu_mapping.c_max) << "\n";
  out << "  alpha_min: " << fmt(c.hu_mapping.alpha_min) << "\n";
  out << "  alpha_max: " << fmt(c.hu_mapping.alpha_max) << "\n";
  out << "  hu_min: " << fmt(c.hu_mapping.hu_min) << "\n";
  out << "  hu_max: " << fmt(c.hu_mapping.hu_max) << "\n";
  out << "  alpha_power: " << fmt(c.hu_mapping.alpha_power) << "\n";
  return out.str();
}

void save_config(const SimConfig& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open config file for writing: " + path);
  out << dump_config(c);
  if (!out) throw IoError("failed to write config file: " + path);
}

}  // namespace tfus
