// SPDX-License-Identifier: Apache-2.0

#include "tfus/pipeline.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <type_traits>

#include <sys/wait.h>
#include <unistd.h>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "tfus/image.hpp"
#include "tfus/medium.hpp"
#include "tfus/npy.hpp"
#include "tfus/solver.hpp"
#include "tfus/transducer.hpp"
#include "tfus/version.hpp"
#include "tfus/volume.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace tfus {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Re-throws the active exception with "stage <label>: " prepended, keeping
// the type so the CLI's exit-code mapping still sees it.
[[noreturn]] void rethrow_with_stage(const std::string& prefix) {
  try {
    throw;
  } catch (const ArgumentError& e) {
    throw ArgumentError(prefix + e.what());
  } catch (const DivergenceError& e) {
    throw DivergenceError(prefix + e.what(), e.step_index);
  } catch (const FormatError& e) {
    throw FormatError(prefix + e.what());
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(prefix + e.what());
  }
  // Non-std exceptions pass through the handlers above untouched.
}

template <typename F>
auto run_stage(const char* label, std::vector<StageTiming>* timings, F&& fn)
    -> std::invoke_result_t<F> {
  const auto t0 = Clock::now();
  try {
    if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
      fn();
      if (timings) timings->push_back({label, seconds_since(t0)});
    } else {
      auto result = fn();
      if (timings) timings->push_back({label, seconds_since(t0)});
      return result;
    }
  } catch (...) {
    rethrow_with_stage(std::string("stage ") + label + ": ");
  }
}

std::string placement_name(const std::string& subject, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_placement%02d", index + 1);
  return subject + buf;
}

// Simulation-grid spacing implied by a config: c_min resolved with ppw points
// per wavelength at f0, in mm.
double sim_spacing_mm(const SimConfig& c) {
  return c.hu_mapping.c_min / (c.f0 * c.ppw) * 1e3;
}

void normalize_by_max(ScalarField3D& f) {
  const float m = f.max_value();
  if (m > 0.0f) {
    for (auto& v : f.values) v /= m;
  }
}

// Pulls a 3-D member out of an npz file as a field. Shapes are C order
// (z, y, x); memory stays x-fastest either way.
ScalarField3D load_member_field(const std::string& path, const std::string& member,
                                const Vec3& spacing) {
  const npy::Entries entries = npy::read_npz(path);
  const auto it = std::find_if(entries.begin(), entries.end(),
                               [&](const auto& e) { return e.first == member; });
  if (it == entries.end()) {
    throw FormatError("npz member '" + member + "' not found in " + path);
  }
  const npy::Array& a = it->second;
  if (a.shape.size() != 3) {
    throw FormatError("npz member '" + member + "' in " + path + " is not 3-D");
  }
  ScalarField3D f;
  f.grid.dims = {static_cast<int>(a.shape[2]), static_cast<int>(a.shape[1]),
                 static_cast<int>(a.shape[0])};
  f.grid.spacing = spacing;
  f.units = Unit::Pressure;
  if (a.dtype == npy::Dtype::f4) {
    f.values = a.as<float>();
  } else if (a.dtype == npy::Dtype::f8) {
    const std::vector<double> d = a.as<double>();
    f.values.assign(d.begin(), d.end());
  } else {
    throw FormatError("npz member '" + member + "' has unsupported dtype " +
                      npy::dtype_descr(a.dtype));
  }
  f.validate();
  return f;
}

}  // namespace

void GenerationParams::validate() const {
  if (!(roc_lo > 0.0) || roc_hi < roc_lo) throw ArgumentError("generation roc range invalid");
  if (!(dia_lo > 0.0) || dia_hi < dia_lo) {
    throw ArgumentError("generation diameter range invalid");
  }
  if (offset_lo < 0.0 || offset_hi < offset_lo) {
    throw ArgumentError("generation offset range invalid");
  }
  if (boundary_pad < 0.0) throw ArgumentError("generation boundary pad must be non-negative");
  if (max_retries < 1) throw ArgumentError("generation max_retries must be at least 1");
}

PlacementSample sample_placement(const ScalarField3D& ct, SplitMix64& rng,
                                 const GenerationParams& gen) {
  gen.validate();
  ct.validate();
  const GridSpec& g = ct.grid;
  const Vec3 center = {g.origin[0] + 0.5 * (g.dims[0] - 1) * g.spacing[0],
                       g.origin[1] + 0.5 * (g.dims[1] - 1) * g.spacing[1],
                       g.origin[2] + 0.5 * (g.dims[2] - 1) * g.spacing[2]};
  const double step =
      0.25 * std::min({g.spacing[0], g.spacing[1], g.spacing[2]});
  // Farthest any in-grid point can be from the center, plus slack.
  const double t_max = 0.5 * norm(g.extent()) + step;

  for (int attempt = 0; attempt < gen.max_retries; ++attempt) {
    double roc, dia;
    do {
      roc = rng.uniform(gen.roc_lo, gen.roc_hi);
      dia = rng.uniform(gen.dia_lo, gen.dia_hi);
    } while (dia > 2.0 * roc);

    // Near-boundary candidate: offset voxels in from a random side per axis.
    Vec3 cand;
    for (int a = 0; a < 3; ++a) {
      const double off = gen.boundary_pad + rng.uniform(gen.offset_lo, gen.offset_hi);
      const double coord = rng.coin_flip() ? (g.dims[a] - 1) - off : off;
      cand[a] = g.origin[a] + coord * g.spacing[a];
    }

    Vec3 dir = cand - center;
    const double len = norm(dir);
    if (len <= 0.0) continue;
    dir = dir * (1.0 / len);

    // March the ray inward from the boundary: the first above-threshold voxel
    // is the outermost surface voxel along this direction.
    bool found = false;
    Vec3 position{0, 0, 0};
    for (double t = t_max; t >= 0.0; t -= step) {
      const Vec3 p = center + dir * t;
      const int i = static_cast<int>(std::llround((p[0] - g.origin[0]) / g.spacing[0]));
      const int j = static_cast<int>(std::llround((p[1] - g.origin[1]) / g.spacing[1]));
      const int k = static_cast<int>(std::llround((p[2] - g.origin[2]) / g.spacing[2]));
      if (!g.contains(i, j, k)) continue;
      if (ct.at(i, j, k) > gen.surface_threshold) {
        position = g.voxel_center(i, j, k);
        found = true;
        break;
      }
    }
    if (!found) continue;

    PlacementSample s;
    s.position = position;
    s.axis = orient_towards(position, center);
    s.roc = roc;
    s.diameter = dia;
    return s;
  }
  throw ArgumentError("sample_placement: no surface voxel above threshold found along " +
                      std::to_string(gen.max_retries) + " sampled rays");
}

std::vector<SimConfig> generate_configs(const ScalarField3D& ct, const std::string& ct_path,
                                        const std::string& subject_id, int n,
                                        std::uint64_t seed, const GenerationParams& gen,
                                        const SimConfig& base) {
  if (n < 1) throw ArgumentError("generate_configs: n must be at least 1");
  if (subject_id.empty()) throw ArgumentError("generate_configs: subject_id is empty");
  gen.validate();
  const double probe_spacing = sim_spacing_mm(base) * 0.5;

  std::vector<SimConfig> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const std::uint64_t stream = derive_stream(seed, subject_id, static_cast<std::uint64_t>(k));
    SplitMix64 rng(stream);

    SimConfig cfg = base;
    cfg.subject_id = subject_id;
    cfg.ct_path = ct_path;
    cfg.seed = stream;
    cfg.output_path = placement_name(subject_id, k) + ".npz";

    bool placed = false;
    for (int attempt = 0; attempt < gen.max_retries && !placed; ++attempt) {
      const PlacementSample s = sample_placement(ct, rng, gen);
      BowlTransducer t = base.transducer;
      t.position = s.position;
      t.focus = s.position + s.axis * s.roc;
      t.roc = s.roc;
      t.diameter = s.diameter;
      t.f0 = cfg.f0;
      if (!(t.amplitude > 0.0)) t.amplitude = 60e3;
      try {
        // The bowl must rasterize inside the volume; probing on the CT grid is
        // equivalent up to sub-voxel edge effects since the physical extent is
        // what the simulation grid shares.
        (void)make_source(t, ct.grid, probe_spacing);
        cfg.transducer = t;
        placed = true;
      } catch (const ArgumentError&) {
        // bowl fell outside the grid; redraw
      }
    }
    if (!placed) {
      throw ArgumentError("generate_configs: no in-bounds placement found for '" + subject_id +
                          "' index " + std::to_string(k) + " after " +
                          std::to_string(gen.max_retries) + " attempts");
    }
    cfg.validate();
    out.push_back(std::move(cfg));
  }
  return out;
}

RunArtifacts run_simulation(const SimConfig& config, const RunOptions& opts) {
  config.validate();
  const auto total0 = Clock::now();
#ifdef _OPENMP
  if (opts.threads > 0) omp_set_num_threads(opts.threads);
#endif

  RunArtifacts art;
  std::vector<StageTiming>* tm = &art.timings;

  ScalarField3D ct_raw = run_stage("load", tm, [&] {
    return read_volume(config.ct_path, Unit::HU);
  });

  const double dx_mm = sim_spacing_mm(config);
  ScalarField3D ct = run_stage("resample", tm, [&] {
    return resample_isotropic(ct_raw, dx_mm);
  });
  ct_raw = ScalarField3D{};

  AcousticMedium medium = run_stage("medium", tm, [&] {
    return build_medium(ct, config.hu_mapping, config.water_threshold);
  });

  SourceSet source = run_stage("source", tm, [&] {
    return make_source(config.transducer, medium.grid(), dx_mm * 0.5);
  });

  const Index3 pml = run_stage("pml", tm, [&]() -> Index3 {
    if (config.pml.fixed) {
      return {config.pml.thickness, config.pml.thickness, config.pml.thickness};
    }
    return {choose_pml_size(medium.grid().dims[0], config.pml.lo, config.pml.hi),
            choose_pml_size(medium.grid().dims[1], config.pml.lo, config.pml.hi),
            choose_pml_size(medium.grid().dims[2], config.pml.lo, config.pml.hi)};
  });

  TimeParams tp;
  RecordingPlan plan;
  run_stage("time", tm, [&] {
    tp = make_time_params(config.f0, config.ppw, config.cfl, medium.grid(), medium,
                          config.t_end_override, 1.5, config.n_record_periods);
    plan = make_recording_plan(tp.n_steps, tp.ppp, config.n_record_periods);
  });

  Index3 padded_dims{0, 0, 0};
  double c_ref = 0.0;
  std::size_t solver_peak = 0;
  std::optional<SlabStore> store;
  const RunSummary summary = run_stage("solve", tm, [&] {
    SolverOptions sopts;
    sopts.progress = opts.progress;
    Engine engine(medium, tp.dt, pml, sopts);
    padded_dims = engine.padded_grid().dims;
    c_ref = engine.c_ref();
    solver_peak = engine.bytes_estimate();
    store.emplace(medium.grid(), plan, opts.ram_cap_bytes);
    WaveStateT<float> state = engine.make_state();
    engine.set_source(source, [t = config.transducer](double time) {
      return drive_signal(t, time);
    });
    const Index3 pml_t = engine.pml_thickness();
    return engine.run(state, tp.n_steps, [&](std::int64_t done, const float* p) {
      store->put_step(done, p, padded_dims, pml_t);
    });
  });

  AmplitudeField amp = run_stage("extract", tm, [&] {
    return extract_amplitude(*store, config.f0, tp.ppp);
  });
  const bool spilled = store->spilled();
  const std::size_t resident_peak = store->resident_bytes_peak();
  const std::int64_t samples = store->samples();
  store.reset();

  CropResult crop = run_stage("crop", tm, [&] {
    return crop_roi(amp.amplitude, ct, source, config.crop_size);
  });

  run_stage("write", tm, [&] {
    const fs::path out_path(config.output_path);
    if (!out_path.parent_path().empty()) fs::create_directories(out_path.parent_path());

    const auto n = static_cast<std::size_t>(config.crop_size);
    const std::vector<std::size_t> cube_shape{n, n, n};
    const std::vector<Vec3> points = sample_bowl_surface(config.transducer, dx_mm * 0.5);
    std::vector<double> coords;
    coords.reserve(points.size() * 3);
    for (const Vec3& p : points) {
      coords.push_back(p[0]);
      coords.push_back(p[1]);
      coords.push_back(p[2]);
    }
    npy::Entries entries;
    entries.emplace_back("ct_crop", npy::Array::from<float>(cube_shape, crop.ct.values));
    entries.emplace_back("pressure", npy::Array::from<float>(cube_shape, crop.pressure.values));
    entries.emplace_back("transducer_coords",
                         npy::Array::from<double>({points.size(), 3}, coords));
    npy::write_npz(out_path, entries, /*compress=*/true);

    json meta;
    meta["schema"] = "tfus-run/1";
    meta["version"] = kVersion;
    meta["seed"] = config.seed;
    meta["config_yaml"] = dump_config(config);
    meta["grid"] = {{"dims", medium.grid().dims},
                    {"spacing_mm", medium.grid().spacing},
                    {"origin_mm", medium.grid().origin}};
    meta["solver"] = {{"padded_dims", padded_dims},
                      {"pml_thickness", pml},
                      {"c_ref_m_per_s", c_ref},
                      {"engine_bytes_estimate", solver_peak},
                      {"peak_bytes_estimate", summary.peak_bytes_estimate}};
    meta["time"] = {{"dt_s", tp.dt},
                    {"n_steps", tp.n_steps},
                    {"ppp", tp.ppp},
                    {"cfl", tp.cfl},
                    {"t_end_s", tp.t_end}};
    meta["source"] = {{"surface_points", source.n_points},
                      {"grid_nodes", source.nodes.size()},
                      {"point_spacing_mm", source.point_spacing},
                      {"calibration", source.calibration},
                      {"weight_sum", source.weight_sum()}};
    meta["recording"] = {{"start_step", plan.start_step},
                         {"end_step", plan.end_step},
                         {"samples", samples},
                         {"n_periods", plan.n_periods},
                         {"spilled", spilled},
                         {"resident_bytes_peak", resident_peak}};
    meta["crop"] = {{"offset_voxels", crop.offset}, {"size", config.crop_size}};
    json jt = json::object();
    for (const StageTiming& st : art.timings) jt[st.stage] = st.seconds;
    meta["timings_s"] = jt;
    meta["wall_s"] = seconds_since(total0);
    meta["conventions"] = {
        {"arrays", "C order (z, y, x); x fastest in memory"},
        {"ct_crop", "HU, resampled to the simulation grid"},
        {"pressure", "Pa, steady-state amplitude at f0"},
        {"transducer_coords", "mm, world frame, bowl surface sample points"},
        {"crop_offset", "voxels into the simulation grid"}};

    const std::string sidecar = config.output_path + ".json";
    try {
      const std::string text = meta.dump(2) + "\n";
      npy::write_file_atomic(sidecar, std::vector<unsigned char>(text.begin(), text.end()));
    } catch (...) {
      std::error_code ec;
      fs::remove(out_path, ec);
      throw;
    }
  });

  art.npz_path = config.output_path;
  art.sidecar_path = config.output_path + ".json";
  art.crop_offset = crop.offset;
  art.n_steps = tp.n_steps;
  art.wall_seconds = seconds_since(total0);
  return art;
}

FieldMetrics evaluate_pair(const std::string& pred_path, const std::string& gt_path,
                           const EvaluateOptions& opts) {
  opts.params.validate();
  ScalarField3D pred = load_member_field(pred_path, opts.member, opts.params.spacing);
  ScalarField3D gt = load_member_field(gt_path, opts.member, opts.params.spacing);
  normalize_by_max(pred);
  normalize_by_max(gt);
  if (opts.log_compress) {
    pred = log_compress(pred);
    gt = log_compress(gt);
  }
  return compute_metrics(pred, gt, opts.params);
}

std::string evaluate_report(const std::vector<std::pair<std::string, std::string>>& pairs,
                            const EvaluateOptions& opts) {
  if (pairs.empty()) throw ArgumentError("evaluate: no (pred, gt) pairs given");

  json report;
  report["schema"] = "metrics-report/1";
  report["version"] = kVersion;
  report["preprocessing"] = {{"normalize", "each field divided by its own max"},
                             {"log_compress", opts.log_compress},
                             {"member", opts.member}};
  report["params"] = {{"alpha_weight", opts.params.alpha_weight},
                      {"lambda", opts.params.lambda},
                      {"spacing", opts.params.spacing}};
  report["conventions"] = {{"relative_l2_pct", "l2 ratio scaled by 100"},
                           {"max_pressure_error_pct", "percent of gt max"},
                           {"focal_position_error", "spacing units"},
                           {"std", "population"}};

  std::vector<FieldMetrics> all;
  all.reserve(pairs.size());
  json samples = json::array();
  for (const auto& [pred, gt] : pairs) {
    const FieldMetrics m = evaluate_pair(pred, gt, opts);
    all.push_back(m);
    samples.push_back({{"pred", pred},
                       {"gt", gt},
                       {"relative_l2_pct", m.relative_l2 * 100.0},
                       {"focal_position_error", m.focal_position_error},
                       {"max_pressure_error_pct", m.max_pressure_error},
                       {"weighted_mse", m.weighted_mse},
                       {"grad_loss", m.grad_loss},
                       {"composite", m.composite}});
  }
  report["samples"] = samples;

  const MetricsSummary s = summarize(all);
  const auto enc = [](const MetricSummary& v, double scale) {
    return json{{"median", v.median * scale}, {"mean", v.mean * scale}, {"std", v.std_dev * scale}};
  };
  report["summary"] = {{"relative_l2_pct", enc(s.relative_l2, 100.0)},
                       {"focal_position_error", enc(s.focal_position_error, 1.0)},
                       {"max_pressure_error_pct", enc(s.max_pressure_error, 1.0)},
                       {"weighted_mse", enc(s.weighted_mse, 1.0)},
                       {"grad_loss", enc(s.grad_loss, 1.0)},
                       {"composite", enc(s.composite, 1.0)}};
  return report.dump(2) + "\n";
}

namespace {

// Shells out one child per config via /proc/self/exe, at most `jobs` live at
// once. Returns the number of failed runs.
int run_jobs(const std::vector<std::string>& configs, int jobs,
             const std::vector<std::string>& extra_flags) {
  char exe[PATH_MAX];
  const ssize_t len = ::readlink("/proc/self/exe", exe, sizeof exe - 1);
  if (len <= 0) throw IoError("cannot resolve /proc/self/exe for --jobs");
  exe[len] = '\0';

  std::map<pid_t, std::string> active;
  std::size_t next = 0;
  int failures = 0;
  while (next < configs.size() || !active.empty()) {
    while (static_cast<int>(active.size()) < jobs && next < configs.size()) {
      const std::string& cfg = configs[next++];
      std::vector<std::string> child_args = {exe, "run"};
      child_args.insert(child_args.end(), extra_flags.begin(), extra_flags.end());
      child_args.push_back(cfg);
      const pid_t pid = ::fork();
      if (pid < 0) throw IoError(std::string("fork failed: ") + std::strerror(errno));
      if (pid == 0) {
        std::vector<char*> argv;
        argv.reserve(child_args.size() + 1);
        for (std::string& s : child_args) argv.push_back(s.data());
        argv.push_back(nullptr);
        ::execv(exe, argv.data());
        std::fprintf(stderr, "execv failed: %s\n", std::strerror(errno));
        ::_exit(127);
      }
      active.emplace(pid, cfg);
    }
    int status = 0;
    const pid_t pid = ::waitpid(-1, &status, 0);
    if (pid < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("waitpid failed: ") + std::strerror(errno));
    }
    const auto it = active.find(pid);
    if (it == active.end()) continue;
    const std::string cfg = it->second;
    active.erase(it);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      ++failures;
      std::fprintf(stderr, "run failed for %s\n", cfg.c_str());
    }
  }
  return failures;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"tfusim: transcranial focused ultrasound simulation pipeline"};
  app.name("tfusim");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  int rc = 0;

  // gen-config
  auto* gen_cmd = app.add_subcommand("gen-config", "Generate seeded placement configs");
  std::string gen_subject, gen_ct, gen_out_dir = ".";
  std::uint64_t gen_seed = 0;
  int gen_count = 20;
  GenerationParams gp;
  SimConfig gen_base;
  double gen_amplitude = 60e3;
  gen_cmd->add_option("--subject", gen_subject, "Subject identifier")->required();
  gen_cmd->add_option("--ct", gen_ct, "CT volume, .npz or NIfTI")->required();
  gen_cmd->add_option("--out-dir", gen_out_dir, "Directory for the YAML files");
  gen_cmd->add_option("--seed", gen_seed, "Master seed");
  gen_cmd->add_option("--count", gen_count, "Placements to generate")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--roc-min", gp.roc_lo, "Min radius of curvature, mm");
  gen_cmd->add_option("--roc-max", gp.roc_hi, "Max radius of curvature, mm");
  gen_cmd->add_option("--dia-min", gp.dia_lo, "Min aperture diameter, mm");
  gen_cmd->add_option("--dia-max", gp.dia_hi, "Max aperture diameter, mm");
  gen_cmd->add_option("--offset-min", gp.offset_lo, "Min boundary offset, voxels");
  gen_cmd->add_option("--offset-max", gp.offset_hi, "Max boundary offset, voxels");
  gen_cmd->add_option("--pad", gp.boundary_pad, "Fixed boundary pad, voxels");
  gen_cmd->add_option("--surface-hu", gp.surface_threshold, "Surface HU threshold");
  gen_cmd->add_option("--f0", gen_base.f0, "Drive frequency, Hz");
  gen_cmd->add_option("--ppw", gen_base.ppw, "Points per wavelength");
  gen_cmd->add_option("--cfl", gen_base.cfl, "CFL number");
  gen_cmd->add_option("--crop-size", gen_base.crop_size, "Output cube edge, voxels");
  gen_cmd->add_option("--periods", gen_base.n_record_periods, "Recording window, periods");
  gen_cmd->add_option("--amplitude", gen_amplitude, "Source amplitude, Pa");
  gen_cmd->add_option("--water-hu", gen_base.water_threshold, "Water HU threshold");
  gen_cmd->callback([&] {
    gen_base.transducer.amplitude = gen_amplitude;
    const ScalarField3D ct = read_volume(gen_ct, Unit::HU);
    const std::vector<SimConfig> configs =
        generate_configs(ct, gen_ct, gen_subject, gen_count, gen_seed, gp, gen_base);
    fs::create_directories(gen_out_dir);
    for (std::size_t k = 0; k < configs.size(); ++k) {
      const fs::path path =
          fs::path(gen_out_dir) / (placement_name(gen_subject, static_cast<int>(k)) + ".yaml");
      save_config(configs[k], path.string());
      std::printf("%s\n", path.c_str());
    }
  });

  // run
  auto* run_cmd = app.add_subcommand("run", "Run simulations from config files");
  std::vector<std::string> run_configs;
  int run_threads = 0, run_jobs_n = 1;
  std::uint64_t run_ram_cap = SlabStore::kDefaultRamCap;
  bool run_progress = false;
  run_cmd->add_option("configs", run_configs, "YAML config paths")->required();
  run_cmd->add_option("--threads", run_threads, "OpenMP threads per run, 0 = default");
  run_cmd->add_option("--ram-cap", run_ram_cap, "Recording RAM cap in bytes before spilling");
  run_cmd->add_option("--jobs", run_jobs_n, "Concurrent runs (subprocesses)")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--progress", run_progress, "Per-step progress lines on stderr");
  run_cmd->callback([&] {
    if (run_jobs_n > 1 && run_configs.size() > 1) {
      std::vector<std::string> extra;
      if (run_threads > 0) {
        extra.push_back("--threads");
        extra.push_back(std::to_string(run_threads));
      }
      extra.push_back("--ram-cap");
      extra.push_back(std::to_string(run_ram_cap));
      if (run_progress) extra.push_back("--progress");
      if (run_jobs(run_configs, run_jobs_n, extra) != 0) rc = 2;
      return;
    }
    for (const std::string& path : run_configs) {
      const SimConfig cfg = load_config(path);
      RunOptions ro;
      ro.ram_cap_bytes = static_cast<std::size_t>(run_ram_cap);
      ro.threads = run_threads;
      ro.progress = run_progress;
      const RunArtifacts art = run_simulation(cfg, ro);
      std::printf("wrote %s (%lld steps, %.1f s)\n", art.npz_path.c_str(),
                  static_cast<long long>(art.n_steps), art.wall_seconds);
    }
  });

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Compare predicted fields against ground truth");
  std::string ev_pred, ev_gt, ev_out = "-";
  EvaluateOptions ev_opts;
  std::vector<double> ev_spacing = {1.0, 1.0, 1.0};
  eval_cmd->add_option("--pred", ev_pred, "Predicted npz file or directory")->required();
  eval_cmd->add_option("--gt", ev_gt, "Ground-truth npz file or directory")->required();
  eval_cmd->add_option("--out", ev_out, "Report path, - for stdout");
  eval_cmd->add_option("--member", ev_opts.member, "npz member to compare");
  eval_cmd->add_option("--alpha", ev_opts.params.alpha_weight, "Weighted-MSE sharpness");
  eval_cmd->add_option("--lambda", ev_opts.params.lambda, "Gradient-loss weight");
  eval_cmd->add_option("--spacing", ev_spacing, "Voxel spacing (mm) for focal distance")
      ->expected(3);
  eval_cmd->add_flag("--log", ev_opts.log_compress, "Compare log(1 + x) fields");
  eval_cmd->callback([&] {
    ev_opts.params.spacing = {ev_spacing[0], ev_spacing[1], ev_spacing[2]};
    std::vector<std::pair<std::string, std::string>> pairs;
    const bool pred_dir = fs::is_directory(ev_pred);
    const bool gt_dir = fs::is_directory(ev_gt);
    if (pred_dir != gt_dir) {
      throw ArgumentError("evaluate: --pred and --gt must both be files or both directories");
    }
    if (pred_dir) {
      std::vector<std::string> names;
      for (const auto& e : fs::directory_iterator(ev_gt)) {
        if (e.path().extension() == ".npz") names.push_back(e.path().filename().string());
      }
      std::sort(names.begin(), names.end());
      for (const std::string& name : names) {
        const fs::path p = fs::path(ev_pred) / name;
        if (fs::exists(p)) pairs.emplace_back(p.string(), (fs::path(ev_gt) / name).string());
      }
      if (pairs.empty()) {
        throw ArgumentError("evaluate: no matching .npz filenames between the directories");
      }
    } else {
      pairs.emplace_back(ev_pred, ev_gt);
    }
    const std::string report = evaluate_report(pairs, ev_opts);
    if (ev_out == "-") {
      std::fputs(report.c_str(), stdout);
    } else {
      npy::write_file_atomic(ev_out, std::vector<unsigned char>(report.begin(), report.end()));
      std::printf("wrote %s\n", ev_out.c_str());
    }
  });

  // phantom
  auto* ph_cmd = app.add_subcommand("phantom", "Write a synthetic skull-shell CT volume");
  std::string ph_out;
  int ph_size = 64;
  double ph_spacing = 0.5, ph_radius = 12.0, ph_thickness = 3.0, ph_hu = 1700.0;
  ph_cmd->add_option("--out", ph_out, "Output .npz path")->required();
  ph_cmd->add_option("--size", ph_size, "Cube edge, voxels")->check(CLI::PositiveNumber);
  ph_cmd->add_option("--spacing", ph_spacing, "Voxel spacing, mm");
  ph_cmd->add_option("--radius", ph_radius, "Shell outer radius, mm; 0 = water box");
  ph_cmd->add_option("--thickness", ph_thickness, "Shell thickness, mm");
  ph_cmd->add_option("--hu", ph_hu, "Shell HU value");
  ph_cmd->callback([&] {
    GridSpec g;
    g.dims = {ph_size, ph_size, ph_size};
    g.spacing = {ph_spacing, ph_spacing, ph_spacing};
    const ScalarField3D ct =
        ph_radius > 0.0
            ? make_skull_phantom(g, ph_radius, ph_thickness, static_cast<float>(ph_hu))
            : ScalarField3D(g, Unit::HU, 0.0f);
    write_volume_npz(ph_out, ct);
    std::printf("wrote %s\n", ph_out.c_str());
  });

  // slice
  auto* sl_cmd = app.add_subcommand("slice", "Export a 2-D slice image from an npz member");
  std::string sl_npz, sl_member = "pressure", sl_out;
  int sl_axis = 2, sl_index = -1;
  bool sl_log = false;
  sl_cmd->add_option("npz", sl_npz, "Input .npz path")->required();
  sl_cmd->add_option("--member", sl_member, "3-D npz member name");
  sl_cmd->add_option("--axis", sl_axis, "Slice axis 0/1/2")->check(CLI::Range(0, 2));
  sl_cmd->add_option("--index", sl_index, "Slice index, -1 = middle");
  sl_cmd->add_option("--out", sl_out, "Output .pgm or .png path")->required();
  sl_cmd->add_flag("--log", sl_log, "Log color scale");
  sl_cmd->callback([&] {
    const ScalarField3D f = load_member_field(sl_npz, sl_member, {1.0, 1.0, 1.0});
    const int index = sl_index < 0 ? f.grid.dims[sl_axis] / 2 : sl_index;
    export_slice_image(f, sl_axis, index, sl_out,
                       sl_log ? ColorScale::Log : ColorScale::Linear);
    std::printf("wrote %s\n", sl_out.c_str());
  });

  // validate
  auto* val_cmd = app.add_subcommand("validate", "Schema-check a config file");
  std::string val_path;
  val_cmd->add_option("config", val_path, "YAML config path")->required();
  val_cmd->callback([&] {
    const SimConfig cfg = load_config(val_path);
    std::printf("OK: %s (subject %s, f0 %g Hz, roc %g mm, diameter %g mm)\n", val_path.c_str(),
                cfg.subject_id.c_str(), cfg.f0, cfg.transducer.roc, cfg.transducer.diameter);
  });

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const ArgumentError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return rc;
}

}  // namespace tfus
