#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "coinccl/collection.hpp"
#include "coinccl/rng.hpp"
#include "coinccl/slab.hpp"

namespace coinccl {

struct GeneratorConfig {
  double duration_s = 5.0;
  double electron_rate_per_s = 1.0e6;
  double pair_detect_prob = 1.0e-4;   // photon produced and detected
  double electron_accept_prob = 1.0;  // detector efficiency for electrons
  double delay_mean_ns = -80.0;       // mean of t_e - t_gamma
  double delay_fwhm_ns = 42.0;
  double toa_quantum_ns = 1.5625;
  double photon_quantum_ns = 0.001;
  double mean_cluster_size = 2.8;
  double background_photon_rate_per_s = 0.0;
  double dark_rate_per_s = 0.0;
  std::vector<double> column_offsets_ns;  // index = column; missing = 0
  std::vector<std::array<std::uint16_t, 2>> defective_pixels;
  double drift_velocity_px_per_s = 0.0;  // applied along +x
  std::uint64_t seed = 1;

  // detector-plane model
  std::uint32_t pixels = 256;
  double half_span_urad = 15.0;
  // converts transverse recoil to deflection angle theta = q/q_beam;
  // default matches a 200 keV beam
  double beam_wavenumber_per_nm = 2505.323185;
  double zero_loss_sigma_urad = 0.8;
  double zero_loss_energy_fwhm_eV = 0.9;
  ElectronEnergyFilter energy_filter;  // disabled by default
  double cluster_spread_ns = 20.0;     // neighbor-hit ToA jitter bound
  double tot_median_ns = 1000.0;
  double tot_sigma_log = 0.5;
  double tot_quantum_ns = 25.0;
};

struct ElectronHit {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  double toa_ns = 0.0;  // multiple of toa_quantum_ns
  double tot_ns = 0.0;  // multiple of tot_quantum_ns, > 0

  bool operator==(const ElectronHit&) const = default;
};

struct PhotonTag {
  double t_ns = 0.0;  // multiple of photon_quantum_ns
  std::uint8_t channel = 0;

  bool operator==(const PhotonTag&) const = default;
};

// photon origin labels in GroundTruth::photon_kind
enum photon_kind : std::uint8_t {
  photon_paired = 0,
  photon_background = 1,
  photon_dark = 2,
};

struct TruthPair {
  std::uint64_t electron_id = 0;  // arrival index of the parent electron
  std::uint64_t photon_id = 0;    // index into the emitted photon stream
  double energy_eV = 0.0;
  double qx_per_nm = 0.0;  // electron transverse recoil; the photon flies
  double qy_per_nm = 0.0;  // along -(qx, qy)
  bool electron_detected = false;
  double electron_toa_ns = -1.0;  // quantized seed-hit time when detected
  double photon_t_ns = 0.0;

  bool operator==(const TruthPair&) const = default;
};

struct GroundTruth {
  std::vector<TruthPair> pairs;
  std::vector<std::uint8_t> photon_kind;  // one entry per emitted photon
  std::uint64_t electrons_total = 0;
  std::uint64_t electrons_detected = 0;
};

struct EventStream {
  std::vector<ElectronHit> hits;     // sorted by toa
  std::vector<PhotonTag> photons;    // sorted by t
  GroundTruth truth;
};

// Cell-integrated sampling weights over (energy, |q|, electron azimuth).
struct PairDensityGrid {
  std::vector<double> energy_edges;  // size nE + 1
  std::vector<double> q_edges;       // size nQ + 1
  std::size_t phi_bins = 0;
  std::vector<double> weights;  // nE * nQ * phi_bins, row-major (E, Q, phi)
  double total = 0.0;
};

// Tabulates tr_density * fiber * detector * filter * mirror acceptance
// (at the reflected photon direction) * Q over cell centers.
PairDensityGrid build_pair_density(const SlabConfig& cfg,
                                   const MirrorModel& mirror,
                                   const EfficiencyCurves& curves,
                                   const ElectronEnergyFilter& efilter,
                                   const PhotonBandpass& bandpass,
                                   std::size_t energy_bins = 120,
                                   std::size_t q_bins = 160,
                                   std::size_t phi_bins = 64);

// Alias-table sampler over the grid cells with uniform jitter inside the
// selected cell; every sample satisfies |q| < E/(hbar c).
class PairSampler {
 public:
  explicit PairSampler(PairDensityGrid grid);  // zero total -> config error

  struct Sample {
    double energy_eV = 0.0;
    double qx_per_nm = 0.0;
    double qy_per_nm = 0.0;
    double khat_x = 0.0;  // photon transverse direction, = -q*hbar*c/E
    double khat_y = 0.0;
  };

  Sample sample(Rng& rng) const;
  double total_weight() const { return grid_.total; }
  const PairDensityGrid& grid() const { return grid_; }

 private:
  PairDensityGrid grid_;
  std::vector<double> prob_;        // alias-table acceptance probabilities
  std::vector<std::uint32_t> alias_;
  std::vector<std::uint32_t> cells_;  // nonzero-weight cell indices
};

// Pixel-hit cluster for one detected electron: the seed hit lands at the
// detection time, neighbors within (0, cluster_spread_ns]; column offsets
// are added and ToA is rounded to the nearest toa_quantum afterwards.
std::vector<ElectronHit> emit_clusters(double t_ns, std::uint16_t seed_x,
                                       std::uint16_t seed_y,
                                       const GeneratorConfig& cfg, Rng& rng);

// Full Monte Carlo stream; byte-deterministic for a fixed seed and config.
// sampler may be null when pair_detect_prob == 0.
EventStream generate_stream(const GeneratorConfig& cfg,
                            const PairSampler* sampler);

void validate(const GeneratorConfig& cfg);

}  // namespace coinccl
