#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coinccl/collection.hpp"
#include "coinccl/eventgen.hpp"
#include "coinccl/lad.hpp"
#include "coinccl/pipeline.hpp"
#include "coinccl/slab.hpp"

namespace coinccl {

/// mirror geometry as declared in a run config
struct MirrorSpec {
  std::string kind = "parametric"; // parametric | tabulated | full-disk
  double theta_min_rad = 0.35;
  double theta_max_rad = 1.25;
  double gap_center_rad = 0.0;
  double gap_halfwidth_rad = 0.5; // negative disables the gap
  std::vector<std::vector<std::array<double, 2>>> shading_polygons;
  std::string file; // acceptance grid CSV for the tabulated kind
};

struct AnalysisConfig {
  ClusterParams cluster;
  CorrelateParams correlate;
  double tau_ns = 50.0;
  double background_offset_ns = -100.0;
  double drift_window_s = 50.0;
  bool exclusive = false;
  MetricsPhysics metrics;
};

// One declarative document drives every command. Unknown keys are
// rejected; relative paths are resolved against the config file's
// directory; the FNV-1a hash of the canonical (key-sorted) JSON is
// embedded in every output.
struct RunConfig {
  std::string dielectric_file;
  double thickness_nm = 100.0;
  double beam_energy_eV = 200000.0;

  MirrorSpec mirror;
  std::string fiber_file;
  std::string detector_file;

  ElectronEnergyFilter energy_filter;
  PhotonBandpass bandpass;

  // physics-map grid
  double map_energy_min_eV = 0.5;
  double map_energy_max_eV = 5.0;
  double map_energy_step_eV = 0.01;
  std::size_t map_q_points = 601;
  MapResolution map_resolution; // zero widths = no blur

  ImageSpec image;
  LadMode image_mode = LadMode::plain;
  ZeroLossSpot zero_loss;

  GeneratorConfig generator;
  AnalysisConfig analysis;

  std::string output_dir = ".";
  std::uint64_t seed = 1;

  std::string base_dir;    // directory the config file lives in
  std::string canonical;   // key-sorted JSON the hash is computed from
  std::uint64_t config_hash = 0;
};

RunConfig parse_run_config(const std::string& json_text,
                           const std::string& source_name,
                           const std::string& base_dir);
RunConfig load_run_config(const std::string& path);

/// resolve a possibly relative path against a base directory
std::string resolve_path(const std::string& base_dir, const std::string& path);

} // namespace coinccl
