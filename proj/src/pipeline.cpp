#include "coinccl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "coinccl/errors.hpp"

namespace coinccl {

namespace {

// All correlation arithmetic runs on integer ticks of a quarter histogram
// bin so bin assignment is exact.
constexpr double kTickNs = 1.5625 / 4.0;

std::int64_t to_ticks(double t_ns) { return std::llround(t_ns / kTickNs); }

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b)
      parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::uint64_t CrossCorrHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

void sort_hits(std::vector<ElectronHit>& hits) {
  std::sort(hits.begin(), hits.end(),
            [](const ElectronHit& a, const ElectronHit& b) {
              if (a.toa_ns != b.toa_ns)
                return a.toa_ns < b.toa_ns;
              if (a.x != b.x)
                return a.x < b.x;
              if (a.y != b.y)
                return a.y < b.y;
              return a.tot_ns < b.tot_ns;
            });
}

std::vector<ElectronHit> correct_hits(
    std::vector<ElectronHit> hits, const std::vector<double>& column_offsets,
    const std::vector<std::array<std::uint16_t, 2>>& defective_pixels) {
  std::unordered_set<std::uint32_t> dead;
  for (const auto& p : defective_pixels)
    dead.insert(static_cast<std::uint32_t>(p[0]) << 16 | p[1]);

  std::vector<ElectronHit> out;
  out.reserve(hits.size());
  for (ElectronHit h : hits) {
    if (dead.count(static_cast<std::uint32_t>(h.x) << 16 | h.y))
      continue;
    if (h.x < column_offsets.size())
      h.toa_ns -= column_offsets[h.x];
    out.push_back(h);
  }
  sort_hits(out);
  return out;
}

std::vector<ClusterEvent> cluster_hits(std::vector<ElectronHit> hits,
                                       const ClusterParams& params) {
  if (params.eps <= 0.0 || params.time_unit_ns <= 0.0)
    throw validation_error("clustering needs positive eps and time unit");
  sort_hits(hits);
  const std::size_t n = hits.size();
  UnionFind uf(n);
  const double eps2 = params.eps * params.eps;
  const double max_dt_ns = params.eps * params.time_unit_ns;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dt_ns = hits[j].toa_ns - hits[i].toa_ns;
      if (dt_ns > max_dt_ns)
        break;
      const double dx = static_cast<double>(hits[j].x) - hits[i].x;
      const double dy = static_cast<double>(hits[j].y) - hits[i].y;
      const double dt = dt_ns / params.time_unit_ns;
      if (dx * dx + dy * dy + dt * dt <= eps2)
        uf.unite(i, j);
    }
  }

  std::unordered_map<std::size_t, std::size_t> slot;
  std::vector<ClusterEvent> clusters;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = uf.find(i);
    auto [it, fresh] = slot.try_emplace(root, clusters.size());
    if (fresh) {
      clusters.push_back({hits[i].toa_ns, static_cast<double>(hits[i].x),
                          static_cast<double>(hits[i].y), hits[i].tot_ns, 1});
      continue;
    }
    ClusterEvent& c = clusters[it->second];
    c.t_ns = std::min(c.t_ns, hits[i].toa_ns);
    c.x = std::min(c.x, static_cast<double>(hits[i].x));
    c.y = std::min(c.y, static_cast<double>(hits[i].y));
    c.total_tot_ns += hits[i].tot_ns;
    ++c.n_hits;
  }

  std::erase_if(clusters, [&](const ClusterEvent& c) {
    return c.total_tot_ns < params.tot_cut_ns;
  });
  std::sort(clusters.begin(), clusters.end(),
            [](const ClusterEvent& a, const ClusterEvent& b) {
              if (a.t_ns != b.t_ns)
                return a.t_ns < b.t_ns;
              if (a.x != b.x)
                return a.x < b.x;
              return a.y < b.y;
            });
  return clusters;
}

CrossCorrHistogram cross_correlate(const std::vector<ClusterEvent>& electrons,
                                   const std::vector<PhotonTag>& photons,
                                   const CorrelateParams& params) {
  if (params.bin_ns <= 0.0 || params.window_ns <= 0.0 ||
      params.interval_s <= 0.0)
    throw validation_error("correlation needs positive window, bin, interval");

  CrossCorrHistogram hist;
  hist.bin_width_ns = params.bin_ns;
  hist.window_ns = params.window_ns;
  const std::int64_t window_t = to_ticks(params.window_ns);
  const std::int64_t bin_t = std::max<std::int64_t>(1, to_ticks(params.bin_ns));
  const std::size_t bins =
      static_cast<std::size_t>((2 * window_t + bin_t - 1) / bin_t);
  hist.counts.assign(bins, 0);
  const std::int64_t guard_t = to_ticks(params.guard_ns);
  const std::int64_t interval_t = to_ticks(params.interval_s * 1e9);

  std::vector<std::int64_t> te(electrons.size());
  for (std::size_t i = 0; i < electrons.size(); ++i)
    te[i] = to_ticks(electrons[i].t_ns);

  std::size_t lo = 0;
  for (const PhotonTag& photon : photons) {
    const std::int64_t tg = to_ticks(photon.t_ns);
    const std::int64_t start = (tg / interval_t) * interval_t;
    if (tg - start < guard_t || (start + interval_t) - tg < guard_t)
      continue;
    while (lo < te.size() && te[lo] < tg - window_t)
      ++lo;
    for (std::size_t j = lo; j < te.size() && te[j] <= tg + window_t; ++j) {
      const std::int64_t offset = te[j] - tg + window_t;  // 0 .. 2*window
      std::size_t idx = static_cast<std::size_t>(offset / bin_t);
      if (idx >= bins)
        idx = bins - 1;
      ++hist.counts[idx];
    }
  }
  return hist;
}

double estimate_delay(const CrossCorrHistogram& hist) {
  const std::size_t n = hist.counts.size();
  std::size_t best = 0;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (hist.counts[i] > 0)
      any = true;
    if (hist.counts[i] > hist.counts[best])
      best = i;  // strict > keeps ties at the most negative bin
  }
  if (!any)
    throw validation_error("cross-correlation histogram is empty");

  const std::size_t lo = best >= 5 ? best - 5 : 0;
  const std::size_t hi = std::min(best + 5, n - 1);
  double weight = 0.0, moment = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double c = static_cast<double>(hist.counts[i]);
    weight += c;
    moment += c * hist.bin_center_ns(i);
  }
  return moment / weight;
}

namespace {

std::vector<CoincidencePair> match_impl(
    const std::vector<ClusterEvent>& electrons,
    const std::vector<PhotonTag>& photons, double expected_dt_ns,
    double tau_ns, bool exclusive) {
  std::vector<CoincidencePair> out;
  if (electrons.empty() || photons.empty())
    return out;
  std::vector<double> te(electrons.size());
  for (std::size_t i = 0; i < electrons.size(); ++i)
    te[i] = electrons[i].t_ns;

  std::vector<char> used(exclusive ? te.size() : 0, 0);
  out.reserve(photons.size());
  for (std::size_t pi = 0; pi < photons.size(); ++pi) {
    const double target = photons[pi].t_ns + expected_dt_ns;
    const auto it = std::lower_bound(te.begin(), te.end(), target);
    std::int64_t right = it - te.begin();
    std::int64_t left = right - 1;
    if (exclusive) {
      while (right < static_cast<std::int64_t>(te.size()) && used[right])
        ++right;
      while (left >= 0 && used[left])
        --left;
    }
    std::int64_t pick = -1;
    const bool has_l = left >= 0;
    const bool has_r = right < static_cast<std::int64_t>(te.size());
    if (has_l && has_r) {
      const double dl = std::abs(te[left] - target);
      const double dr = std::abs(te[right] - target);
      pick = dl <= dr ? left : right;  // tie -> earlier electron
    } else if (has_l) {
      pick = left;
    } else if (has_r) {
      pick = right;
    } else {
      continue;  // exclusive mode ran out of electrons
    }
    const double dt = te[pick] - photons[pi].t_ns;
    CoincidencePair pair;
    pair.photon_index = pi;
    pair.electron_index = static_cast<std::uint64_t>(pick);
    pair.dt_ns = dt;
    pair.classified = std::abs(dt - expected_dt_ns) <= 0.5 * tau_ns;
    if (exclusive && pair.classified)
      used[pick] = 1;
    out.push_back(pair);
  }
  return out;
}

}  // namespace

std::vector<CoincidencePair> match_coincidences(
    const std::vector<ClusterEvent>& electrons,
    const std::vector<PhotonTag>& photons, double expected_dt_ns,
    double tau_ns, bool exclusive) {
  return match_impl(electrons, photons, expected_dt_ns, tau_ns, exclusive);
}

std::vector<CoincidencePair> background_pairs(
    const std::vector<ClusterEvent>& electrons,
    const std::vector<PhotonTag>& photons, double expected_dt_ns,
    double tau_ns, double offset_ns, bool exclusive) {
  return match_impl(electrons, photons, expected_dt_ns + offset_ns, tau_ns,
                    exclusive);
}

std::vector<ClusterEvent> drift_correct(std::vector<ClusterEvent> events,
                                        double window_s) {
  if (events.empty())
    return events;
  if (window_s <= 0.0)
    throw validation_error("drift window must be positive");

  double gx = 0.0, gy = 0.0;
  for (const ClusterEvent& e : events) {
    gx += e.x;
    gy += e.y;
  }
  gx /= static_cast<double>(events.size());
  gy /= static_cast<double>(events.size());

  const double window_ns = window_s * 1e9;
  std::size_t begin = 0;
  while (begin < events.size()) {
    const double win_index = std::floor(events[begin].t_ns / window_ns);
    std::size_t end = begin;
    double wx = 0.0, wy = 0.0;
    while (end < events.size() &&
           std::floor(events[end].t_ns / window_ns) == win_index) {
      wx += events[end].x;
      wy += events[end].y;
      ++end;
    }
    const double count = static_cast<double>(end - begin);
    wx = wx / count - gx;
    wy = wy / count - gy;
    for (std::size_t i = begin; i < end; ++i) {
      events[i].x -= wx;
      events[i].y -= wy;
    }
    begin = end;
  }
  return events;
}

MetricsReport compute_metrics(std::uint64_t n_coin, std::uint64_t n_false,
                              std::uint64_t n_eftem, double live_time_s,
                              const MetricsPhysics& physics) {
  if (!(live_time_s > 0.0))
    throw validation_error("live time must be positive");

  MetricsReport r;
  r.r_coin_per_s = static_cast<double>(n_coin) / live_time_s;
  r.r_false_per_s = static_cast<double>(n_false) / live_time_s;
  r.r_true_per_s = r.r_coin_per_s - r.r_false_per_s;
  if (r.r_true_per_s < 0.0) {
    r.r_true_per_s = 0.0;
    r.true_rate_clamped = true;
  }
  if (n_false == 0) {
    r.car_infinite = true;
    r.car = std::numeric_limits<double>::infinity();
    r.p_photon_given_coincidence = n_coin > 0 ? 1.0 : 0.0;
  } else {
    r.car = r.r_true_per_s / r.r_false_per_s;
    r.p_photon_given_coincidence = r.car / (r.car + 1.0);
  }
  r.r_eftem_per_s = static_cast<double>(n_eftem) / live_time_s;
  if (n_eftem > 0 && physics.beam_rate_per_s > 0.0 && physics.alpha_e > 0.0 &&
      physics.p_coh_in_window > 0.0) {
    r.p_photon_given_eftem = physics.beam_rate_per_s * physics.alpha_e *
                             physics.p_coh_in_window / r.r_eftem_per_s;
    r.enhancement_a = r.p_photon_given_coincidence / r.p_photon_given_eftem;
    r.eftem_defined = true;
  }
  return r;
}

double peak_fwhm(const CrossCorrHistogram& hist, double half_range_ns) {
  const std::size_t n = hist.counts.size();
  std::size_t best = 0;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += hist.counts[i];
    if (hist.counts[i] > hist.counts[best])
      best = i;
  }
  if (total == 0)
    throw validation_error("cross-correlation histogram is empty");

  const std::size_t edge = std::max<std::size_t>(1, n / 8);
  double baseline = 0.0;
  for (std::size_t i = 0; i < edge; ++i)
    baseline += static_cast<double>(hist.counts[i]) +
                static_cast<double>(hist.counts[n - 1 - i]);
  baseline /= static_cast<double>(2 * edge);

  const double peak_center = hist.bin_center_ns(best);
  double weight = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = hist.bin_center_ns(i);
    if (std::abs(x - peak_center) > half_range_ns)
      continue;
    const double c =
        std::max(0.0, static_cast<double>(hist.counts[i]) - baseline);
    weight += c;
    mean += c * x;
  }
  if (weight <= 0.0)
    throw validation_error("no counts above baseline around the peak");
  mean /= weight;
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = hist.bin_center_ns(i);
    if (std::abs(x - peak_center) > half_range_ns)
      continue;
    const double c =
        std::max(0.0, static_cast<double>(hist.counts[i]) - baseline);
    var += c * (x - mean) * (x - mean);
  }
  var /= weight;
  return 2.0 * std::sqrt(2.0 * std::log(2.0) * var);
}

}  // namespace coinccl
