// SPDX-License-Identifier: Apache-2.0
//
// YAML-backed simulation configuration. Parsing rejects unknown keys at
// every level so typos fail loudly; dumping is deterministic (fixed key
// order, shortest round-trip number formatting) because generated configs
// are part of the reproducibility contract.

#pragma once

#include <cstdint>
#include <string>

#include "tfus/medium.hpp"
#include "tfus/transducer.hpp"

namespace tfus {

struct PmlConfig {
  bool fixed = false;  // false: search [lo, hi] per axis; true: use thickness
  int thickness = 10;
  int lo = 10;
  int hi = 20;
};

struct SimConfig {
  int schema_version = 1;
  std::string subject_id;
  std::string ct_path;
  std::string output_path;
  std::uint64_t seed = 0;
  double f0 = 500e3;  // Hz
  double ppw = 6.0;
  double cfl = 0.3;
  int n_record_periods = 3;
  int crop_size = 64;
  double t_end_override = 0.0;   // s; 0 means "estimate automatically"
  double water_threshold = 300.0;  // HU
  PmlConfig pml;
  BowlTransducer transducer;  // transducer.f0 mirrors the top-level f0
  HuMappingParams hu_mapping;

  // Throws ArgumentError naming the offending YAML field.
  void validate() const;
};

SimConfig parse_config(const std::string& yaml_text);
SimConfig load_config(const std::string& path);
std::string dump_config(const SimConfig& config);
void save_config(const SimConfig& config, const std::string& path);

}  // namespace tfus
