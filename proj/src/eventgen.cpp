#include "coinccl/eventgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "coinccl/constants.hpp"
#include "coinccl/errors.hpp"
#include "coinccl/parallel.hpp"

namespace coinccl {

namespace kc = constants;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kFwhmToSigma = 1.0 / 2.3548200450309493;

double quantize(double v, double quantum) {
  if (quantum <= 0.0)
    return v;
  return std::floor(v / quantum + 0.5) * quantum;
}

void require(bool ok, const char* message) {
  if (!ok)
    throw validation_error(message);
}

}  // namespace

void validate(const GeneratorConfig& cfg) {
  require(cfg.duration_s >= 0.0, "generator: duration must be >= 0");
  require(cfg.electron_rate_per_s >= 0.0, "generator: electron rate < 0");
  require(cfg.background_photon_rate_per_s >= 0.0,
          "generator: background rate < 0");
  require(cfg.dark_rate_per_s >= 0.0, "generator: dark rate < 0");
  require(cfg.pair_detect_prob >= 0.0 && cfg.pair_detect_prob <= 1.0,
          "generator: pair_detect_prob outside [0,1]");
  require(cfg.electron_accept_prob >= 0.0 && cfg.electron_accept_prob <= 1.0,
          "generator: electron_accept_prob outside [0,1]");
  require(cfg.toa_quantum_ns > 0.0, "generator: toa quantum must be > 0");
  require(cfg.photon_quantum_ns > 0.0,
          "generator: photon quantum must be > 0");
  require(cfg.mean_cluster_size >= 1.0,
          "generator: mean cluster size must be >= 1");
  require(cfg.delay_fwhm_ns >= 0.0, "generator: delay fwhm < 0");
  require(cfg.pixels >= 2, "generator: detector needs at least 2x2 pixels");
  require(cfg.half_span_urad > 0.0, "generator: half span must be > 0");
  require(cfg.beam_wavenumber_per_nm > 0.0,
          "generator: beam wavenumber must be > 0");
  require(cfg.zero_loss_sigma_urad >= 0.0, "generator: beam sigma < 0");
  require(cfg.cluster_spread_ns >= 0.0, "generator: cluster spread < 0");
  require(cfg.tot_median_ns > 0.0, "generator: tot median must be > 0");
  require(cfg.tot_quantum_ns > 0.0, "generator: tot quantum must be > 0");
  if (cfg.energy_filter.enabled)
    require(cfg.energy_filter.halfwidth_eV > 0.0,
            "generator: enabled energy filter needs halfwidth > 0");
}

PairDensityGrid build_pair_density(const SlabConfig& cfg,
                                   const MirrorModel& mirror,
                                   const EfficiencyCurves& curves,
                                   const ElectronEnergyFilter& efilter,
                                   const PhotonBandpass& bandpass,
                                   std::size_t energy_bins,
                                   std::size_t q_bins, std::size_t phi_bins) {
  if (energy_bins < 1 || q_bins < 1 || phi_bins < 1)
    throw validation_error("pair density grid needs at least one bin each");

  double lo = std::max({cfg.dielectric.min_energy(),
                        curves.fiber.min_energy(),
                        curves.detector.min_energy()});
  double hi = std::min({cfg.dielectric.max_energy(),
                        curves.fiber.max_energy(),
                        curves.detector.max_energy()});
  if (efilter.enabled) {
    lo = std::max(lo, efilter.center_eV - efilter.halfwidth_eV);
    hi = std::min(hi, efilter.center_eV + efilter.halfwidth_eV);
  }
  if (bandpass.enabled) {
    const double lam_hi = bandpass.center_nm + 0.5 * bandpass.fwhm_nm;
    const double lam_lo = bandpass.center_nm - 0.5 * bandpass.fwhm_nm;
    lo = std::max(lo, kc::photon_eV_nm / lam_hi);
    if (lam_lo > 0.0)
      hi = std::min(hi, kc::photon_eV_nm / lam_lo);
  }

  PairDensityGrid grid;
  grid.phi_bins = phi_bins;
  if (!(lo < hi)) {
    grid.energy_edges = {lo, lo};
    grid.q_edges = {0.0, 0.0};
    grid.weights.assign(phi_bins, 0.0);
    return grid;
  }

  grid.energy_edges = linspace(lo, hi, energy_bins + 1);
  grid.q_edges = linspace(0.0, hi / kc::hbar_c_eV_nm, q_bins + 1);
  grid.weights.assign(energy_bins * q_bins * phi_bins, 0.0);

  const double de = (hi - lo) / static_cast<double>(energy_bins);
  const double dq = grid.q_edges[1] - grid.q_edges[0];
  const double dphi = 2.0 * kPi / static_cast<double>(phi_bins);

  parallel_for(energy_bins, [&](std::size_t ie) {
    const double e = 0.5 * (grid.energy_edges[ie] + grid.energy_edges[ie + 1]);
    double spectral = curves.fiber(e) * curves.detector(e) *
                      electron_filter_weight(efilter, e) *
                      bandpass_weight(bandpass, e);
    if (spectral <= 0.0)
      return;
    const double k0 = e / kc::hbar_c_eV_nm;
    for (std::size_t iq = 0; iq < q_bins; ++iq) {
      const double q = 0.5 * (grid.q_edges[iq] + grid.q_edges[iq + 1]);
      if (q >= k0)
        break;
      const double rho = tr_density(cfg, e, q);
      if (rho <= 0.0)
        continue;
      const double base = rho * spectral * q * de * dq * dphi;
      const double scale = kc::hbar_c_eV_nm / e;
      for (std::size_t ip = 0; ip < phi_bins; ++ip) {
        const double phi = (static_cast<double>(ip) + 0.5) * dphi;
        const double acc = mirror_acceptance(
            mirror, -q * std::cos(phi) * scale, -q * std::sin(phi) * scale);
        if (acc > 0.0)
          grid.weights[(ie * q_bins + iq) * phi_bins + ip] = base * acc;
      }
    }
  });

  grid.total = std::accumulate(grid.weights.begin(), grid.weights.end(), 0.0);
  return grid;
}

PairSampler::PairSampler(PairDensityGrid grid) : grid_(std::move(grid)) {
  for (std::uint32_t i = 0; i < grid_.weights.size(); ++i)
    if (grid_.weights[i] > 0.0)
      cells_.push_back(i);
  if (cells_.empty() || !(grid_.total > 0.0))
    throw config_error("pair sampling density is identically zero");

  // Vose alias construction
  const std::size_t n = cells_.size();
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i)
    scaled[i] = grid_.weights[cells_[i]] * static_cast<double>(n) /
                grid_.total;
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i)
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (std::uint32_t i : large)
    prob_[i] = 1.0;
  for (std::uint32_t i : small)
    prob_[i] = 1.0;
}

PairSampler::Sample PairSampler::sample(Rng& rng) const {
  const std::size_t n = cells_.size();
  const std::size_t column = static_cast<std::size_t>(rng.integer(n));
  const std::size_t pick =
      rng.uniform() < prob_[column] ? column : alias_[column];
  const std::uint32_t cell = cells_[pick];

  const std::size_t nq = grid_.q_edges.size() - 1;
  const std::size_t ip = cell % grid_.phi_bins;
  const std::size_t iq = (cell / grid_.phi_bins) % nq;
  const std::size_t ie = cell / (grid_.phi_bins * nq);

  const double dphi = 2.0 * kPi / static_cast<double>(grid_.phi_bins);
  Sample s;
  double q = 0.0;
  for (int attempt = 0; attempt < 64; ++attempt) {
    s.energy_eV =
        rng.uniform(grid_.energy_edges[ie], grid_.energy_edges[ie + 1]);
    q = rng.uniform(grid_.q_edges[iq], grid_.q_edges[iq + 1]);
    if (q < s.energy_eV / kc::hbar_c_eV_nm)
      break;
  }
  const double k0 = s.energy_eV / kc::hbar_c_eV_nm;
  if (q >= k0)
    q = std::nextafter(k0, 0.0);  // cell sliver astride the light line
  const double phi = (static_cast<double>(ip) + rng.uniform()) * dphi;
  s.qx_per_nm = q * std::cos(phi);
  s.qy_per_nm = q * std::sin(phi);
  const double scale = kc::hbar_c_eV_nm / s.energy_eV;
  s.khat_x = -s.qx_per_nm * scale;
  s.khat_y = -s.qy_per_nm * scale;
  return s;
}

std::vector<ElectronHit> emit_clusters(double t_ns, std::uint16_t seed_x,
                                       std::uint16_t seed_y,
                                       const GeneratorConfig& cfg, Rng& rng) {
  const std::uint64_t size = 1 + rng.poisson(cfg.mean_cluster_size - 1.0);

  std::vector<std::array<std::uint16_t, 2>> members{{seed_x, seed_y}};
  std::unordered_set<std::uint32_t> occupied{
      static_cast<std::uint32_t>(seed_x) << 16 | seed_y};
  std::vector<std::array<std::uint16_t, 2>> candidates;
  auto push_neighbors = [&](std::uint16_t x, std::uint16_t y) {
    const int nx[4] = {x - 1, x + 1, x, x};
    const int ny[4] = {y, y, y - 1, y + 1};
    for (int k = 0; k < 4; ++k) {
      if (nx[k] < 0 || ny[k] < 0 ||
          nx[k] >= static_cast<int>(cfg.pixels) ||
          ny[k] >= static_cast<int>(cfg.pixels))
        continue;
      const auto key = static_cast<std::uint32_t>(nx[k]) << 16 |
                       static_cast<std::uint32_t>(ny[k]);
      if (!occupied.count(key))
        candidates.push_back({static_cast<std::uint16_t>(nx[k]),
                              static_cast<std::uint16_t>(ny[k])});
    }
  };
  push_neighbors(seed_x, seed_y);
  while (members.size() < size) {
    bool grew = false;
    while (!candidates.empty()) {
      const std::size_t j =
          static_cast<std::size_t>(rng.integer(candidates.size()));
      const auto cell = candidates[j];
      candidates[j] = candidates.back();
      candidates.pop_back();
      const auto key = static_cast<std::uint32_t>(cell[0]) << 16 | cell[1];
      if (occupied.count(key))
        continue;
      occupied.insert(key);
      members.push_back(cell);
      push_neighbors(cell[0], cell[1]);
      grew = true;
      break;
    }
    if (!grew)
      break;  // detector corner exhausted the neighborhood
  }

  std::vector<ElectronHit> hits;
  hits.reserve(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto [x, y] = members[i];
    double toa = t_ns;
    if (i > 0 && cfg.cluster_spread_ns > 0.0)
      toa += cfg.cluster_spread_ns * (1.0 - rng.uniform());
    if (x < cfg.column_offsets_ns.size())
      toa += cfg.column_offsets_ns[x];
    toa = quantize(toa, cfg.toa_quantum_ns);
    if (toa < 0.0)
      toa = 0.0;
    double tot = rng.log_normal(cfg.tot_median_ns, cfg.tot_sigma_log);
    tot = std::max(cfg.tot_quantum_ns, quantize(tot, cfg.tot_quantum_ns));
    hits.push_back({x, y, toa, tot});
  }
  return hits;
}

EventStream generate_stream(const GeneratorConfig& cfg,
                            const PairSampler* sampler) {
  validate(cfg);
  if (cfg.pair_detect_prob > 0.0 && sampler == nullptr)
    throw config_error("pair_detect_prob > 0 requires a pair sampler");

  Rng rng(cfg.seed);
  EventStream out;
  const double duration_ns = cfg.duration_s * 1e9;
  const double pitch_urad =
      2.0 * cfg.half_span_urad / static_cast<double>(cfg.pixels);
  const double center_px = (static_cast<double>(cfg.pixels) - 1.0) / 2.0;
  const double delay_sigma = cfg.delay_fwhm_ns * kFwhmToSigma;
  const double zl_energy_sigma = cfg.zero_loss_energy_fwhm_eV * kFwhmToSigma;

  struct PendingPhoton {
    double t_ns;
    std::uint8_t kind;
    std::int64_t pair_index;  // -1 for background and dark counts
  };
  std::vector<PendingPhoton> photons;

  auto clamp_pixel = [&](double v) {
    const auto max_px = static_cast<long long>(cfg.pixels) - 1;
    const long long r = std::llround(v);
    return static_cast<std::uint16_t>(std::clamp<long long>(r, 0, max_px));
  };

  if (cfg.electron_rate_per_s > 0.0 && cfg.duration_s > 0.0) {
    const double mean_gap_ns = 1e9 / cfg.electron_rate_per_s;
    double t = 0.0;
    for (;;) {
      t += rng.exponential(mean_gap_ns);
      if (t > duration_ns)
        break;
      const std::uint64_t id = out.truth.electrons_total++;

      double theta_x, theta_y, energy;
      std::int64_t pair_index = -1;
      if (rng.bernoulli(cfg.pair_detect_prob)) {
        const PairSampler::Sample s = sampler->sample(rng);
        theta_x = s.qx_per_nm / cfg.beam_wavenumber_per_nm * 1e6;
        theta_y = s.qy_per_nm / cfg.beam_wavenumber_per_nm * 1e6;
        energy = s.energy_eV;
        const double delta = rng.normal(cfg.delay_mean_ns, delay_sigma);
        const double tg = t - delta;
        if (tg >= 0.0) {
          const double tq = quantize(tg, cfg.photon_quantum_ns);
          pair_index = static_cast<std::int64_t>(out.truth.pairs.size());
          TruthPair pair;
          pair.electron_id = id;
          pair.energy_eV = s.energy_eV;
          pair.qx_per_nm = s.qx_per_nm;
          pair.qy_per_nm = s.qy_per_nm;
          pair.photon_t_ns = tq;
          out.truth.pairs.push_back(pair);
          photons.push_back({tq, photon_paired, pair_index});
        }
      } else {
        theta_x = rng.normal(0.0, cfg.zero_loss_sigma_urad);
        theta_y = rng.normal(0.0, cfg.zero_loss_sigma_urad);
        energy = rng.normal(0.0, zl_energy_sigma);
      }

      bool detected =
          electron_filter_weight(cfg.energy_filter, energy) > 0.0;
      if (detected)
        detected = rng.bernoulli(cfg.electron_accept_prob);
      if (detected) {
        ++out.truth.electrons_detected;
        const double drift_px = cfg.drift_velocity_px_per_s * (t * 1e-9);
        const std::uint16_t xi =
            clamp_pixel(center_px + theta_x / pitch_urad + drift_px);
        const std::uint16_t yi =
            clamp_pixel(center_px + theta_y / pitch_urad);
        auto cluster = emit_clusters(t, xi, yi, cfg, rng);
        out.hits.insert(out.hits.end(), cluster.begin(), cluster.end());
        if (pair_index >= 0) {
          out.truth.pairs[pair_index].electron_detected = true;
          out.truth.pairs[pair_index].electron_toa_ns =
              quantize(t, cfg.toa_quantum_ns);
        }
      }
    }
  }

  const std::pair<double, std::uint8_t> extra_streams[2] = {
      {cfg.background_photon_rate_per_s, photon_background},
      {cfg.dark_rate_per_s, photon_dark}};
  for (const auto& [rate, kind] : extra_streams) {
    if (rate <= 0.0 || cfg.duration_s <= 0.0)
      continue;
    const double mean_gap_ns = 1e9 / rate;
    double t = 0.0;
    for (;;) {
      t += rng.exponential(mean_gap_ns);
      if (t > duration_ns)
        break;
      photons.push_back({quantize(t, cfg.photon_quantum_ns), kind, -1});
    }
  }

  // time order with a deterministic tie-break on generation order
  std::vector<std::size_t> order(photons.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (photons[a].t_ns != photons[b].t_ns)
      return photons[a].t_ns < photons[b].t_ns;
    return a < b;
  });
  out.photons.resize(photons.size());
  out.truth.photon_kind.resize(photons.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const PendingPhoton& p = photons[order[pos]];
    out.photons[pos] = {p.t_ns, 0};
    out.truth.photon_kind[pos] = p.kind;
    if (p.pair_index >= 0)
      out.truth.pairs[static_cast<std::size_t>(p.pair_index)].photon_id = pos;
  }

  std::stable_sort(out.hits.begin(), out.hits.end(),
                   [](const ElectronHit& a, const ElectronHit& b) {
                     return a.toa_ns < b.toa_ns;
                   });
  return out;
}

}  // namespace coinccl
