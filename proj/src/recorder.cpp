// SPDX-License-Identifier: Apache-2.0

#include "tfus/recorder.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <numbers>
#include <string>

namespace tfus {

RecordingPlan make_recording_plan(std::int64_t n_steps, int ppp, int n_periods) {
  if (ppp <= 0) throw ArgumentError("ppp must be positive");
  if (n_periods < 0) throw ArgumentError("n_periods must be non-negative");
  const std::int64_t window = static_cast<std::int64_t>(n_periods) * ppp;
  if (window > n_steps) {
    throw ArgumentError("recording window of " + std::to_string(window) +
                        " steps does not fit in a run of " + std::to_string(n_steps));
  }
  RecordingPlan plan;
  plan.start_step = n_steps - window;
  plan.end_step = n_steps;
  plan.samples_per_period = ppp;
  plan.n_periods = n_periods;
  return plan;
}

double estimate_t_end(const GridSpec& grid, const AcousticMedium& medium, double margin,
                      int n_periods, double f0) {
  grid.validate();
  if (!(margin >= 1.0)) throw ArgumentError("margin must be at least 1");
  if (n_periods < 0) throw ArgumentError("n_periods must be non-negative");
  if (!(f0 > 0.0)) throw ArgumentError("f0 must be positive");
  const Vec3 ext = grid.extent();
  const double diagonal_m = norm(ext) * 1e-3;
  const double c_min = medium.c.min_value();
  if (!(c_min > 0.0)) throw ArgumentError("medium sound speed must be positive");
  return margin * diagonal_m / c_min + static_cast<double>(n_periods) / f0;
}

SlabStore::SlabStore(GridSpec grid, RecordingPlan plan, std::size_t ram_cap_bytes)
    : grid_(grid), plan_(plan) {
  grid_.validate();
  slab_floats_ = static_cast<std::size_t>(grid_.dims[0]) * grid_.dims[1];
  const std::int64_t window = plan_.end_step - plan_.start_step;
  if (window < 0) throw ArgumentError("recording plan has negative window");
  const std::size_t total_bytes =
      static_cast<std::size_t>(window) * grid_.dims[2] * slab_floats_ * sizeof(float);
  if (total_bytes <= ram_cap_bytes) {
    ram_.resize(static_cast<std::size_t>(window) * grid_.dims[2] * slab_floats_);
    resident_peak_ = ram_.size() * sizeof(float);
  } else {
    const char* tmpdir = std::getenv("TMPDIR");
    std::string path = std::string(tmpdir && *tmpdir ? tmpdir : "/tmp") + "/tfus-slabXXXXXX";
    std::vector<char> tmpl(path.begin(), path.end());
    tmpl.push_back('\0');
    fd_ = mkstemp(tmpl.data());
    if (fd_ < 0) throw IoError("cannot create spill file: " + std::string(std::strerror(errno)));
    ::unlink(tmpl.data());  // anonymous: reclaimed even on abnormal exit
    staging_.resize(slab_floats_);
    resident_peak_ = staging_.size() * sizeof(float);
  }
}

SlabStore::~SlabStore() {
  if (fd_ >= 0) ::close(fd_);
}

void SlabStore::write_bytes(std::size_t offset, const void* data, std::size_t bytes) {
  const char* src = static_cast<const char*>(data);
  while (bytes > 0) {
    const ssize_t wrote = ::pwrite(fd_, src, bytes, static_cast<off_t>(offset));
    if (wrote < 0) {
      if (errno == EINTR) continue;
      throw IoError("spill write failed: " + std::string(std::strerror(errno)));
    }
    src += wrote;
    offset += static_cast<std::size_t>(wrote);
    bytes -= static_cast<std::size_t>(wrote);
  }
}

// Strips the PML and stores the interior one slab at a time, so the extra
// resident memory stays bounded by a single slab in spill mode.
template <typename T>
void SlabStore::put_padded(std::int64_t step, const T* p, Index3 padded_dims, Index3 pml) {
  if (!in_window(step)) return;
  for (int a = 0; a < 3; ++a) {
    if (padded_dims[a] != grid_.dims[a] + 2 * pml[a]) {
      throw ArgumentError("padded dims do not match the recording grid");
    }
  }
  const std::int64_t sample = step - plan_.start_step;
  if (sample != next_sample_) {
    throw ArgumentError("recorded steps must arrive in order: expected step " +
                        std::to_string(plan_.start_step + next_sample_) + ", got " +
                        std::to_string(step));
  }
  staging_.resize(slab_floats_);
  resident_peak_ = std::max(resident_peak_, (ram_.size() + staging_.size()) * sizeof(float));
  const int nx = grid_.dims[0], ny = grid_.dims[1], nz = grid_.dims[2];
  for (int z = 0; z < nz; ++z) {
    std::size_t dst = 0;
    for (int j = 0; j < ny; ++j) {
      const std::size_t src =
          static_cast<std::size_t>(pml[0]) +
          static_cast<std::size_t>(padded_dims[0]) *
              (static_cast<std::size_t>(j + pml[1]) +
               static_cast<std::size_t>(padded_dims[1]) * static_cast<std::size_t>(z + pml[2]));
      for (int i = 0; i < nx; ++i, ++dst) staging_[dst] = static_cast<float>(p[src + i]);
    }
    const std::size_t index =
        (static_cast<std::size_t>(sample) * nz + static_cast<std::size_t>(z)) * slab_floats_;
    if (fd_ < 0) {
      std::copy_n(staging_.begin(), slab_floats_, ram_.begin() + index);
    } else {
      write_bytes(index * sizeof(float), staging_.data(), slab_floats_ * sizeof(float));
    }
  }
  ++next_sample_;
}

void SlabStore::put_step(std::int64_t step, const float* p_padded, Index3 padded_dims,
                         Index3 pml) {
  put_padded(step, p_padded, padded_dims, pml);
}

void SlabStore::put_step(std::int64_t step, const double* p_padded, Index3 padded_dims,
                         Index3 pml) {
  put_padded(step, p_padded, padded_dims, pml);
}

void SlabStore::read_slab(std::int64_t sample, int z, float* out) const {
  if (sample < 0 || sample >= next_sample_ || z < 0 || z >= grid_.dims[2]) {
    throw ArgumentError("slab read out of range");
  }
  const std::size_t index =
      (static_cast<std::size_t>(sample) * grid_.dims[2] + static_cast<std::size_t>(z)) *
      slab_floats_;
  if (fd_ < 0) {
    std::copy_n(ram_.begin() + index, slab_floats_, out);
    return;
  }
  char* dst = reinterpret_cast<char*>(out);
  std::size_t offset = index * sizeof(float);
  std::size_t bytes = slab_floats_ * sizeof(float);
  while (bytes > 0) {
    const ssize_t got = ::pread(fd_, dst, bytes, static_cast<off_t>(offset));
    if (got < 0) {
      if (errno == EINTR) continue;
      throw IoError("spill read failed: " + std::string(std::strerror(errno)));
    }
    if (got == 0) throw IoError("spill read hit end of file");
    dst += got;
    offset += static_cast<std::size_t>(got);
    bytes -= static_cast<std::size_t>(got);
  }
}

double single_bin_amplitude(const std::vector<double>& series, int ppp) {
  if (ppp <= 0) throw ArgumentError("ppp must be positive");
  const std::int64_t n = static_cast<std::int64_t>(series.size());
  if (n == 0 || n % ppp != 0) {
    throw ArgumentError("window must hold an integer number of periods");
  }
  double re = 0.0, im = 0.0;
  for (std::int64_t s = 0; s < n; ++s) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(s % ppp) / ppp;
    re += series[static_cast<std::size_t>(s)] * std::cos(angle);
    im += series[static_cast<std::size_t>(s)] * std::sin(angle);
  }
  return 2.0 / static_cast<double>(n) * std::hypot(re, im);
}

AmplitudeField extract_amplitude(const SlabStore& store, double f0, int ppp,
                                 std::int64_t first_sample, std::int64_t n_samples) {
  if (ppp <= 0) throw ArgumentError("ppp must be positive");
  if (!(f0 > 0.0)) throw ArgumentError("f0 must be positive");
  const std::int64_t have = store.samples();
  if (n_samples < 0) n_samples = have - first_sample;
  if (first_sample < 0 || n_samples <= 0 || first_sample + n_samples > have) {
    throw ArgumentError("requested window is outside the recorded samples");
  }
  if (n_samples % ppp != 0) {
    throw ArgumentError("window must hold an integer number of periods");
  }

  std::vector<double> cos_t(static_cast<std::size_t>(ppp));
  std::vector<double> sin_t(static_cast<std::size_t>(ppp));
  for (int s = 0; s < ppp; ++s) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(s) / ppp;
    cos_t[static_cast<std::size_t>(s)] = std::cos(angle);
    sin_t[static_cast<std::size_t>(s)] = std::sin(angle);
  }

  AmplitudeField out;
  out.f0 = f0;
  out.amplitude = ScalarField3D(store.grid(), Unit::Pressure);
  const std::size_t slab = store.slab_floats();
  const int nz = store.grid().dims[2];
  const double scale = 2.0 / static_cast<double>(n_samples);

#pragma omp parallel
  {
    std::vector<float> buf(slab);
    std::vector<double> re(slab), im(slab);
#pragma omp for schedule(dynamic)
    for (int z = 0; z < nz; ++z) {
      std::fill(re.begin(), re.end(), 0.0);
      std::fill(im.begin(), im.end(), 0.0);
      for (std::int64_t s = 0; s < n_samples; ++s) {
        const std::int64_t global = store.plan().start_step + first_sample + s;
        const std::size_t phase = static_cast<std::size_t>(global % ppp);
        store.read_slab(first_sample + s, z, buf.data());
        const double c = cos_t[phase], si = sin_t[phase];
        for (std::size_t i = 0; i < slab; ++i) {
          re[i] += buf[i] * c;
          im[i] += buf[i] * si;
        }
      }
      float* amp = out.amplitude.values.data() + static_cast<std::size_t>(z) * slab;
      for (std::size_t i = 0; i < slab; ++i) {
        amp[i] = static_cast<float>(scale * std::hypot(re[i], im[i]));
      }
    }
  }
  return out;
}

CropResult crop_roi(const ScalarField3D& amplitude, const ScalarField3D& ct,
                    const SourceSet& source, int size) {
  amplitude.validate();
  ct.validate();
  if (amplitude.grid.dims != ct.grid.dims) {
    throw ArgumentError("amplitude and ct grids do not match");
  }
  const Index3 nd = amplitude.grid.dims;
  if (size <= 0) throw ArgumentError("crop size must be positive");
  for (int a = 0; a < 3; ++a) {
    if (size > nd[a]) throw ArgumentError("crop size exceeds the grid");
  }

  Index3 lo = amplitude.grid.unlinear(amplitude.argmax());
  Index3 hi = lo;
  for (const SourceNode& node : source.nodes) {
    const Index3 c = amplitude.grid.unlinear(node.index);
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  }

  Index3 offset{0, 0, 0};
  for (int a = 0; a < 3; ++a) {
    if (hi[a] - lo[a] + 1 > size) {
      throw ArgumentError("region of interest does not fit in the crop size");
    }
    const double center = 0.5 * (lo[a] + hi[a]);
    const int start = static_cast<int>(std::llround(center)) - size / 2;
    offset[a] = std::clamp(start, 0, nd[a] - size);
  }

  CropResult out;
  GridSpec crop_grid;
  crop_grid.dims = {size, size, size};
  crop_grid.spacing = amplitude.grid.spacing;
  crop_grid.origin = amplitude.grid.voxel_center(offset[0], offset[1], offset[2]);
  out.ct = ScalarField3D(crop_grid, ct.units);
  out.pressure = ScalarField3D(crop_grid, amplitude.units);
  out.offset = offset;
  for (int k = 0; k < size; ++k) {
    for (int j = 0; j < size; ++j) {
      const std::size_t src = amplitude.grid.linear(offset[0], j + offset[1], k + offset[2]);
      const std::size_t dst = crop_grid.linear(0, j, k);
      std::copy_n(amplitude.values.begin() + src, size, out.pressure.values.begin() + dst);
      std::copy_n(ct.values.begin() + src, size, out.ct.values.begin() + dst);
    }
  }
  return out;
}

}  // namespace tfus
