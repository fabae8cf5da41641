#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "coinccl/eventgen.hpp"

namespace coinccl {

// One detected electron after clustering: earliest ToA and the bottom-left
// corner (minimum x, minimum y) of the member hits. Positions are doubles so
// drift correction can shift them fractionally.
struct ClusterEvent {
  double t_ns = 0.0;
  double x = 0.0;
  double y = 0.0;
  double total_tot_ns = 0.0;
  std::uint32_t n_hits = 0;

  bool operator==(const ClusterEvent&) const = default;
};

// Histogram of t_e - t_gamma. Bin i covers
// [-window + i*bin, -window + (i+1)*bin); a difference of exactly +window
// lands in the last bin. Binning is performed on integer ticks of
// bin_width/4 so results do not depend on floating-point rounding.
struct CrossCorrHistogram {
  double bin_width_ns = 1.5625;
  double window_ns = 200.0;
  std::vector<std::uint64_t> counts;

  double bin_center_ns(std::size_t i) const {
    return -window_ns + (static_cast<double>(i) + 0.5) * bin_width_ns;
  }
  std::uint64_t total() const;
};

struct CoincidencePair {
  std::uint64_t photon_index = 0;
  std::uint64_t electron_index = 0;
  double dt_ns = 0.0;  // t_e - t_gamma
  bool classified = false;
};

struct MetricsPhysics {
  double p_coh_in_window = 1e-5;  // per-electron detected-photon probability
  double alpha_e = 0.26;          // electron detection efficiency
  double beam_rate_per_s = 1.935e7;
};

struct MetricsReport {
  double r_coin_per_s = 0.0;
  double r_false_per_s = 0.0;
  double r_true_per_s = 0.0;
  double car = 0.0;
  double p_photon_given_coincidence = 0.0;
  double r_eftem_per_s = 0.0;
  double p_photon_given_eftem = 0.0;
  double enhancement_a = 0.0;
  bool car_infinite = false;  // no false coincidences counted
  bool true_rate_clamped = false;
  bool eftem_defined = false;
};

struct ClusterParams {
  double eps = 3.0;
  double time_unit_ns = 50.0;
  double tot_cut_ns = 750.0;
};

struct CorrelateParams {
  double window_ns = 200.0;
  double bin_ns = 1.5625;
  double guard_ns = 200.0;
  double interval_s = 10.0;
};

// Drops defective-pixel hits, subtracts per-column ToA offsets and returns
// the result sorted by (toa, x, y, tot).
std::vector<ElectronHit> correct_hits(
    std::vector<ElectronHit> hits, const std::vector<double>& column_offsets,
    const std::vector<std::array<std::uint16_t, 2>>& defective_pixels);

void sort_hits(std::vector<ElectronHit>& hits);

// Transitive closure of the relation dist((x,y,t/unit)) <= eps. Clusters
// with summed ToT below tot_cut are discarded; output sorted by (t, x, y).
std::vector<ClusterEvent> cluster_hits(std::vector<ElectronHit> hits,
                                       const ClusterParams& params = {});

// Counts every (electron, photon) pair with |t_e - t_gamma| <= window.
// Photons within guard_ns of either edge of their interval_s-sized chunk
// are skipped.
CrossCorrHistogram cross_correlate(const std::vector<ClusterEvent>& electrons,
                                   const std::vector<PhotonTag>& photons,
                                   const CorrelateParams& params = {});

// Centroid of the 11 bins around the histogram argmax (ties resolve to the
// most negative bin); all-zero histogram is a validation error.
double estimate_delay(const CrossCorrHistogram& hist);

// Per photon, the electron whose t_e - t_gamma is nearest expected_dt
// (equidistant candidates resolve to the earlier electron); classified iff
// within tau/2. exclusive removes an electron from the pool once matched.
std::vector<CoincidencePair> match_coincidences(
    const std::vector<ClusterEvent>& electrons,
    const std::vector<PhotonTag>& photons, double expected_dt_ns,
    double tau_ns = 50.0, bool exclusive = false);

// match_coincidences at expected_dt + offset; estimates the accidental rate.
std::vector<CoincidencePair> background_pairs(
    const std::vector<ClusterEvent>& electrons,
    const std::vector<PhotonTag>& photons, double expected_dt_ns,
    double tau_ns = 50.0, double offset_ns = -100.0, bool exclusive = false);

// Subtracts each window's centroid excursion from the global centroid.
std::vector<ClusterEvent> drift_correct(std::vector<ClusterEvent> events,
                                        double window_s = 50.0);

MetricsReport compute_metrics(std::uint64_t n_coin, std::uint64_t n_false,
                              std::uint64_t n_eftem, double live_time_s,
                              const MetricsPhysics& physics);

// Moment-based FWHM of the histogram peak: the baseline is the mean count
// of the outer quarter of bins; the width is the baseline-subtracted
// weighted standard deviation over bins within half_range_ns of the argmax,
// scaled to FWHM. All-zero histogram is a validation error.
double peak_fwhm(const CrossCorrHistogram& hist, double half_range_ns = 60.0);

}  // namespace coinccl
