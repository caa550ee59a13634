// SPDX-License-Identifier: Apache-2.0
//
// Steady-state machinery: decide how long to run, record the tail window of
// the pressure time series slab-by-slab with bounded memory, extract the
// per-voxel amplitude at the drive frequency, and crop the dataset ROI.

#pragma once

#include <cstdint>
#include <vector>

#include "tfus/medium.hpp"
#include "tfus/transducer.hpp"
#include "tfus/types.hpp"

namespace tfus {

struct RecordingPlan {
  std::int64_t start_step = 0;
  std::int64_t end_step = 0;   // exclusive
  int samples_per_period = 0;  // = ppp
  int n_periods = 0;
};

// Window covering the last n_periods*ppp steps of a run of n_steps.
RecordingPlan make_recording_plan(std::int64_t n_steps, int ppp, int n_periods);

// t_end = margin * (grid diagonal)/min(c) + n_periods/f0.
double estimate_t_end(const GridSpec& grid, const AcousticMedium& medium, double margin,
                      int n_periods, double f0);

// Time-series store for the recording window. Holds float32 z-slabs in
// step-major order, in RAM when the window fits under ram_cap_bytes and in an
// unlinked temporary file otherwise. Single writer, ordered by step.
class SlabStore {
 public:
  static constexpr std::size_t kDefaultRamCap = std::size_t(1) << 30;

  SlabStore(GridSpec grid, RecordingPlan plan, std::size_t ram_cap_bytes = kDefaultRamCap);
  ~SlabStore();
  SlabStore(const SlabStore&) = delete;
  SlabStore& operator=(const SlabStore&) = delete;

  const GridSpec& grid() const { return grid_; }
  const RecordingPlan& plan() const { return plan_; }
  bool in_window(std::int64_t step) const {
    return step >= plan_.start_step && step < plan_.end_step;
  }
  std::int64_t samples() const { return next_sample_; }
  std::size_t slab_floats() const { return slab_floats_; }
  bool spilled() const { return fd_ >= 0; }
  std::size_t resident_bytes_peak() const { return resident_peak_; }

  // Appends the pressure of a completed step. Steps outside the window are
  // ignored; in-window steps must arrive in order. The padded overloads strip
  // `pml` voxels per side.
  void put_step(std::int64_t step, const float* p_padded, Index3 padded_dims, Index3 pml);
  void put_step(std::int64_t step, const double* p_padded, Index3 padded_dims, Index3 pml);

  // Reads one (sample, z) slab into out[slab_floats()].
  void read_slab(std::int64_t sample, int z, float* out) const;

 private:
  template <typename T>
  void put_padded(std::int64_t step, const T* p_padded, Index3 padded_dims, Index3 pml);
  void write_bytes(std::size_t offset, const void* data, std::size_t bytes);

  GridSpec grid_;
  RecordingPlan plan_;
  std::size_t slab_floats_ = 0;
  std::int64_t next_sample_ = 0;
  std::vector<float> ram_;
  std::vector<float> staging_;
  int fd_ = -1;
  std::size_t resident_peak_ = 0;
};

struct AmplitudeField {
  ScalarField3D amplitude;  // Pa, units Pressure
  double f0 = 0.0;

  const GridSpec& grid() const { return amplitude.grid; }
};

// Single-bin DFT magnitude at f0 over a window sampled ppp times per period:
// (2/Ns) * |sum p(t_n) exp(-i 2 pi n / ppp)|, accumulated in double precision.
double single_bin_amplitude(const std::vector<double>& series, int ppp);

// Per-voxel amplitude over [first_sample, first_sample + n_samples) of the
// stored window (n_samples = -1 means "to the end"); the sub-window must hold
// an integer number of periods.
AmplitudeField extract_amplitude(const SlabStore& store, double f0, int ppp,
                                 std::int64_t first_sample = 0, std::int64_t n_samples = -1);

struct CropResult {
  ScalarField3D ct;
  ScalarField3D pressure;
  Index3 offset{0, 0, 0};  // crop start voxel in the uncropped grid
};

// size^3 subvolume positioned so the bounding box of (source nodes + amplitude
// argmax) is centered, shifted minimally to stay in bounds.
CropResult crop_roi(const ScalarField3D& amplitude, const ScalarField3D& ct,
                    const SourceSet& source, int size);

}  // namespace tfus
