// SPDX-License-Identifier: Apache-2.0
//
// End-to-end orchestration: seeded config generation, the run pipeline
// (CT -> medium -> source -> solve -> amplitude -> crop -> npz + sidecar),
// metric evaluation over artifacts, and the command-line entry point.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tfus/config.hpp"
#include "tfus/metrics.hpp"
#include "tfus/prng.hpp"
#include "tfus/recorder.hpp"
#include "tfus/types.hpp"

namespace tfus {

struct GenerationParams {
  double roc_lo = 55.0;     // mm
  double roc_hi = 75.0;
  double dia_lo = 55.0;     // mm
  double dia_hi = 75.0;
  double offset_lo = 40.0;  // voxels from the boundary
  double offset_hi = 60.0;
  double boundary_pad = 10.0;  // fixed extra voxels per side
  double surface_threshold = 50.0;  // HU defining the head surface
  int max_retries = 100;

  void validate() const;
};

struct PlacementSample {
  Vec3 position{0, 0, 0};  // mm, on the surface mask
  Vec3 axis{0, 0, 0};      // unit vector, toward the grid center
  double roc = 0.0;        // mm
  double diameter = 0.0;   // mm
};

// One placement draw: samples geometry, casts a ray from the grid center
// through a random near-boundary point, and lands on the outermost voxel
// above the surface threshold. Throws after max_retries failed attempts.
PlacementSample sample_placement(const ScalarField3D& ct, SplitMix64& rng,
                                 const GenerationParams& gen);

// Deterministic for fixed (subject_id, seed): placement k uses the stream
// derive_stream(seed, subject_id, k). `base` supplies every non-placement
// field (f0, mapping, crop, ...).
std::vector<SimConfig> generate_configs(const ScalarField3D& ct, const std::string& ct_path,
                                        const std::string& subject_id, int n,
                                        std::uint64_t seed, const GenerationParams& gen = {},
                                        const SimConfig& base = {});

struct RunOptions {
  std::size_t ram_cap_bytes = SlabStore::kDefaultRamCap;
  int threads = 0;  // 0 = runtime default
  bool progress = false;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunArtifacts {
  std::string npz_path;
  std::string sidecar_path;
  Index3 crop_offset{0, 0, 0};
  std::int64_t n_steps = 0;
  double wall_seconds = 0.0;
  std::vector<StageTiming> timings;
};

// Full pipeline for one config. Writes output_path (npz, atomic) and
// output_path + ".json" (sidecar); on error, partial outputs are removed and
// the failing stage is named in the exception message.
RunArtifacts run_simulation(const SimConfig& config, const RunOptions& opts = {});

struct EvaluateOptions {
  MetricParams params;
  bool log_compress = false;  // log(1+x) after divide-by-max
  std::string member = "pressure";
};

// Loads `member` from both npz files, normalizes each by its own max, and
// compares. relative_l2 is returned as the raw ratio here; the JSON report
// scales it to percent.
FieldMetrics evaluate_pair(const std::string& pred_path, const std::string& gt_path,
                           const EvaluateOptions& opts = {});

// JSON report over (pred, gt) path pairs: per-sample records plus a
// median/mean/std summary block.
std::string evaluate_report(const std::vector<std::pair<std::string, std::string>>& pairs,
                            const EvaluateOptions& opts = {});

int cli_main(const std::vector<std::string>& args);

}  // namespace tfus
