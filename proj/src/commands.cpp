#include "coinccl/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coinccl/constants.hpp"
#include "coinccl/errors.hpp"
#include "coinccl/io.hpp"
#include "coinccl/parallel.hpp"

namespace coinccl {

namespace {

using nlohmann::json;

SlabConfig make_slab(const RunConfig& cfg) {
  if (cfg.dielectric_file.empty())
    throw config_error("config lacks 'dielectric_file'");
  return SlabConfig{cfg.thickness_nm,
                    DielectricTable::load_csv_file(cfg.dielectric_file),
                    BeamKinematics::from_kinetic_energy(cfg.beam_energy_eV)};
}

MirrorModel make_mirror(const MirrorSpec& spec) {
  if (spec.kind == "tabulated")
    return MirrorModel::tabulated_from_csv_file(spec.file);
  if (spec.kind == "full-disk")
    return MirrorModel::full_disk();
  MirrorModel m = MirrorModel::horseshoe();
  m.theta_min_rad = spec.theta_min_rad;
  m.theta_max_rad = spec.theta_max_rad;
  m.gap_center_rad = spec.gap_center_rad;
  m.gap_halfwidth_rad = spec.gap_halfwidth_rad;
  m.shading_polygons = spec.shading_polygons;
  return m;
}

// a missing curve file means unit efficiency over any practical energy
EfficiencyCurve unit_curve() {
  return EfficiencyCurve::from_samples({1e-3, 1e4}, {1.0, 1.0});
}

EfficiencyCurves make_curves(const RunConfig& cfg) {
  EfficiencyCurves curves;
  curves.fiber = cfg.fiber_file.empty()
                     ? unit_curve()
                     : EfficiencyCurve::load_csv_file(cfg.fiber_file);
  curves.detector = cfg.detector_file.empty()
                        ? unit_curve()
                        : EfficiencyCurve::load_csv_file(cfg.detector_file);
  return curves;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  const std::filesystem::path dir =
      cfg.output_dir.empty() ? "." : cfg.output_dir;
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

void write_json_file(const RunConfig& cfg, const std::string& name,
                     const json& j) {
  write_text_file(out_path(cfg, name), j.dump(2) + "\n");
}

std::vector<double> energy_axis(const RunConfig& cfg) {
  std::vector<double> energies;
  const double step = cfg.map_energy_step_eV;
  const std::size_t n = static_cast<std::size_t>(
      std::floor((cfg.map_energy_max_eV - cfg.map_energy_min_eV) / step +
                 0.5)) + 1;
  energies.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    energies.push_back(cfg.map_energy_min_eV + static_cast<double>(i) * step);
  return energies;
}

// integral of 2*pi*Q*rho_tr dQ over [0, k0]; the u = sqrt(k0 - Q)
// substitution removes the inverse-square-root edge at the light line
double tr_q_integral(const SlabConfig& slab, double energy_eV) {
  const double k0 = energy_eV / constants::hbar_c_eV_nm;
  QuadratureOptions opt;
  opt.rel_tol = 1e-9;
  opt.max_evaluations = 1 << 18;
  return integrate_or_throw(
      [&](double u) {
        const double q = k0 - u * u;
        if (q <= 0.0)
          return 0.0;
        return 2.0 * std::numbers::pi * q * tr_density(slab, energy_eV, q) *
               2.0 * u;
      },
      0.0, std::sqrt(k0), opt, "radiative momentum integral did not converge");
}

} // namespace

int cmd_physics_map(const RunConfig& cfg) {
  const SlabConfig slab = make_slab(cfg);

  const std::vector<double> energies = energy_axis(cfg);
  const double q_max =
      3.0 * cfg.map_energy_max_eV / constants::hbar_c_eV_nm;
  const std::vector<double> qs = linspace(0.0, q_max, cfg.map_q_points);
  std::optional<MapResolution> res;
  if (cfg.map_resolution.energy_fwhm_eV > 0 ||
      cfg.map_resolution.q_fwhm_per_nm > 0)
    res = cfg.map_resolution;
  const LossMap map = loss_map(slab, energies, qs, res);

  MatrixMeta meta;
  meta.row_axis = "energy_eV";
  meta.col_axis = "q_per_nm";
  meta.units = "eV^-1 nm^2";
  meta.row_values = map.energy_axis;
  meta.col_values = map.qperp_axis;
  meta.config_hash = cfg.config_hash;
  write_matrix_text(out_path(cfg, "rho.txt"), map.rho, meta);
  write_matrix_binary(out_path(cfg, "rho.bin"), map.rho, meta);
  write_matrix_text(out_path(cfg, "rho_tr.txt"), map.rho_tr, meta);
  write_matrix_binary(out_path(cfg, "rho_tr.bin"), map.rho_tr, meta);

  double max_rho = 0.0, max_tr = 0.0;
  for (std::size_t i = 0; i < map.rho.size(); ++i)
    max_rho = std::max(max_rho, std::abs(map.rho.data()[i]));
  for (std::size_t i = 0; i < map.rho_tr.size(); ++i)
    max_tr = std::max(max_tr, std::abs(map.rho_tr.data()[i]));

  // emission-rate curves over the map energies (strided if very dense)
  std::vector<double> curve_e;
  const std::size_t stride =
      energies.size() > 600 ? (energies.size() + 599) / 600 : 1;
  for (std::size_t i = 0; i < energies.size(); i += stride)
    curve_e.push_back(energies[i]);
  std::vector<double> g_loss(curve_e.size()), g_tr(curve_e.size());
  std::vector<char> g_conv(curve_e.size(), 0);
  parallel_for(curve_e.size(), [&](std::size_t i) {
    const QuadratureResult r = gamma_loss(slab, curve_e[i], qs.back());
    g_loss[i] = r.value;
    g_conv[i] = r.converged ? 1 : 0;
    g_tr[i] = gamma_tr(slab, curve_e[i]);
  });

  // same radiative rate via the momentum route, checked at 0.5 eV steps
  std::vector<double> tr_e;
  for (double e = std::ceil(energies.front() * 2.0) / 2.0;
       e <= energies.back() + 1e-9; e += 0.5)
    tr_e.push_back(e);
  std::vector<double> route_q(tr_e.size()), route_theta(tr_e.size());
  parallel_for(tr_e.size(), [&](std::size_t i) {
    route_q[i] = tr_q_integral(slab, tr_e[i]);
    route_theta[i] = gamma_tr(slab, tr_e[i]);
  });
  double max_rel = 0.0;
  for (std::size_t i = 0; i < tr_e.size(); ++i) {
    const double scale = std::max(std::abs(route_q[i]), 1e-300);
    max_rel = std::max(max_rel,
                       std::abs(route_q[i] - route_theta[i]) / scale);
  }

  // ridge position per map row, from the written map itself
  std::vector<double> ridge_q(map.energy_axis.size());
  std::vector<double> light_line(map.energy_axis.size());
  for (std::size_t r = 0; r < map.rho.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < map.rho.cols(); ++c)
      if (map.rho(r, c) > map.rho(r, best))
        best = c;
    ridge_q[r] = map.qperp_axis[best];
    light_line[r] = map.energy_axis[r] / constants::hbar_c_eV_nm;
  }

  json summary;
  summary["config_hash"] = hash_hex(cfg.config_hash);
  summary["beam"] = {{"kinetic_energy_eV", slab.beam.kinetic_energy_eV},
                     {"gamma", slab.beam.gamma},
                     {"beta", slab.beam.beta},
                     {"wavenumber_per_nm", slab.beam.wavenumber_per_nm}};
  summary["grid"] = {{"energies", energies.size()},
                     {"q_points", qs.size()},
                     {"q_max_per_nm", q_max}};
  summary["map_max_rho"] = max_rho;
  summary["map_max_rho_tr"] = max_tr;
  summary["vacuum_null_passed"] = max_rho < 1e-20 && max_tr < 1e-20;
  summary["emission_curves"] = {
      {"energy_eV", curve_e},
      {"loss_rate_per_eV", g_loss},
      {"loss_converged", std::vector<bool>(g_conv.begin(), g_conv.end())},
      {"radiative_rate_per_eV", g_tr}};
  summary["two_route"] = {{"energy_eV", tr_e},
                          {"momentum_route_per_eV", route_q},
                          {"angle_route_per_eV", route_theta},
                          {"max_rel_diff", max_rel}};
  summary["ridge"] = {{"argmax_q_per_nm", ridge_q},
                      {"light_line_q_per_nm", light_line}};
  write_json_file(cfg, "physics_summary.json", summary);

  std::printf("physics-map: %zux%zu grid, max rho %.6g, two-route max rel "
              "diff %.3g\n",
              energies.size(), qs.size(), max_rho, max_rel);
  return exit_ok;
}

int cmd_lad(const RunConfig& cfg) {
  const SlabConfig slab = make_slab(cfg);
  const MirrorModel mirror = make_mirror(cfg.mirror);
  const EfficiencyCurves curves = make_curves(cfg);

  const LADImage image =
      lad_image(cfg.image_mode, slab, mirror, curves, cfg.energy_filter,
                cfg.bandpass, cfg.image, cfg.zero_loss);
  const RadialProfile profile = radial_profile(image);

  MatrixMeta meta;
  meta.row_axis = "theta_y_urad";
  meta.col_axis = "theta_x_urad";
  meta.units = "eV^-1 nm^2 sr-equivalent";
  meta.config_hash = cfg.config_hash;
  meta.row_values.resize(image.counts.rows());
  meta.col_values.resize(image.counts.cols());
  for (std::size_t i = 0; i < image.counts.rows(); ++i)
    meta.row_values[i] = image.theta_y_urad(i);
  for (std::size_t i = 0; i < image.counts.cols(); ++i)
    meta.col_values[i] = image.theta_x_urad(i);
  write_matrix_text(out_path(cfg, "image.txt"), image.counts, meta);
  write_matrix_binary(out_path(cfg, "image.bin"), image.counts, meta);

  {
    std::string out = "# coinccl-profile v1\n";
    out += "# config_hash " + hash_hex(cfg.config_hash) + "\n";
    out += "theta_urad,qperp_per_nm,intensity\n";
    char buf[128];
    for (std::size_t i = 0; i < profile.theta_urad.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n",
                    profile.theta_urad[i], profile.qperp_per_nm[i],
                    profile.intensity[i]);
      out += buf;
    }
    write_text_file(out_path(cfg, "profile.csv"), out);
  }

  double total = 0.0;
  for (std::size_t i = 0; i < image.counts.size(); ++i)
    total += image.counts.data()[i];

  json summary;
  summary["config_hash"] = hash_hex(cfg.config_hash);
  summary["mode"] =
      cfg.image_mode == LadMode::coincidence ? "coincidence" : "plain";
  summary["pixels"] = cfg.image.pixels;
  summary["pitch_urad"] = image.pitch_urad;
  summary["half_span_urad"] = cfg.image.half_span_urad;
  summary["energy_filter"] = {{"enabled", cfg.energy_filter.enabled},
                              {"center_eV", cfg.energy_filter.center_eV},
                              {"halfwidth_eV", cfg.energy_filter.halfwidth_eV}};
  summary["bandpass"] = {{"enabled", cfg.bandpass.enabled},
                         {"center_nm", cfg.bandpass.center_nm},
                         {"fwhm_nm", cfg.bandpass.fwhm_nm}};
  summary["total_intensity"] = total;
  try {
    const PeakEstimate peak = most_probable_deflection(profile);
    const double qperp = peak.theta_urad * 1e-6 * image.beam_wavenumber_per_nm;
    summary["no_signal"] = false;
    summary["peak"] = {{"theta_urad", peak.theta_urad},
                       {"uncertainty_urad", peak.uncertainty_urad},
                       {"qperp_per_nm", qperp}};
  } catch (const validation_error&) {
    summary["no_signal"] = true;
    summary["peak"] = nullptr;
  }
  write_json_file(cfg, "lad_summary.json", summary);

  std::printf("lad: %s image, total intensity %.6g\n",
              summary["mode"].get<std::string>().c_str(), total);
  return exit_ok;
}

int cmd_simulate(const RunConfig& cfg, bool also_csv) {
  GeneratorConfig gen = cfg.generator;
  gen.beam_wavenumber_per_nm =
      BeamKinematics::from_kinetic_energy(cfg.beam_energy_eV)
          .wavenumber_per_nm;
  validate(gen);

  std::optional<PairSampler> sampler;
  if (gen.pair_detect_prob > 0.0) {
    const SlabConfig slab = make_slab(cfg);
    const MirrorModel mirror = make_mirror(cfg.mirror);
    const EfficiencyCurves curves = make_curves(cfg);
    sampler.emplace(build_pair_density(slab, mirror, curves,
                                       cfg.energy_filter, cfg.bandpass));
  }

  const EventStream stream =
      generate_stream(gen, sampler ? &*sampler : nullptr);

  EventTicks ticks;
  ticks.toa_tick_ns = gen.toa_quantum_ns;
  ticks.tot_tick_ns = gen.tot_quantum_ns;
  ticks.photon_tick_ns = gen.photon_quantum_ns;
  write_hits_binary(out_path(cfg, "electrons.bin"), stream.hits, ticks,
                    cfg.config_hash);
  write_photons_binary(out_path(cfg, "photons.bin"), stream.photons, ticks,
                       cfg.config_hash);
  write_truth(out_path(cfg, "truth.jsonl"), stream.truth, cfg.config_hash);
  if (also_csv) {
    write_hits_csv(out_path(cfg, "electrons.csv"), stream.hits);
    write_photons_csv(out_path(cfg, "photons.csv"), stream.photons);
  }

  std::uint64_t kind_counts[3] = {0, 0, 0};
  for (std::uint8_t k : stream.truth.photon_kind)
    if (k < 3)
      ++kind_counts[k];

  json summary;
  summary["config_hash"] = hash_hex(cfg.config_hash);
  summary["seed"] = gen.seed;
  summary["duration_s"] = gen.duration_s;
  summary["electron_rate_per_s"] = gen.electron_rate_per_s;
  summary["pair_detect_prob"] = gen.pair_detect_prob;
  summary["electrons_total"] = stream.truth.electrons_total;
  summary["electrons_detected"] = stream.truth.electrons_detected;
  summary["hit_count"] = stream.hits.size();
  summary["photon_count"] = stream.photons.size();
  summary["pair_count"] = stream.truth.pairs.size();
  summary["photon_kind_counts"] = {{"paired", kind_counts[0]},
                                   {"background", kind_counts[1]},
                                   {"dark", kind_counts[2]}};
  summary["mean_hits_per_electron"] =
      stream.truth.electrons_detected
          ? static_cast<double>(stream.hits.size()) /
                static_cast<double>(stream.truth.electrons_detected)
          : 0.0;
  write_json_file(cfg, "sim_summary.json", summary);

  std::printf("simulate: %zu hits, %zu photons, %zu pairs (seed %llu)\n",
              stream.hits.size(), stream.photons.size(),
              stream.truth.pairs.size(),
              static_cast<unsigned long long>(gen.seed));
  return exit_ok;
}

namespace {

bool ends_with(const std::string& s, const char* suffix) {
  const std::string suf(suffix);
  return s.size() >= suf.size() &&
         s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

void write_histogram_file(const RunConfig& cfg,
                          const CrossCorrHistogram& hist) {
  Matrix m(hist.counts.size(), 1);
  MatrixMeta meta;
  meta.row_axis = "dt_ns";
  meta.col_axis = "counts";
  meta.config_hash = cfg.config_hash;
  meta.row_values.resize(hist.counts.size());
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    m(i, 0) = static_cast<double>(hist.counts[i]);
    meta.row_values[i] = hist.bin_center_ns(i);
  }
  write_matrix_text(out_path(cfg, "corr_histogram.txt"), m, meta);
}

} // namespace

int cmd_analyze(const RunConfig& cfg, const AnalyzeOptions& opts) {
  const std::string electrons_file = opts.electrons_file.empty()
                                         ? out_path(cfg, "electrons.bin")
                                         : opts.electrons_file;
  const std::string photons_file = opts.photons_file.empty()
                                       ? out_path(cfg, "photons.bin")
                                       : opts.photons_file;
  std::string truth_file = opts.truth_file;
  if (truth_file.empty()) {
    const std::string candidate = out_path(cfg, "truth.jsonl");
    if (std::filesystem::exists(candidate))
      truth_file = candidate;
  }

  std::vector<ElectronHit> hits = ends_with(electrons_file, ".csv")
                                      ? read_hits_csv(electrons_file)
                                      : read_hits_binary(electrons_file);
  const std::vector<PhotonTag> photons = ends_with(photons_file, ".csv")
                                             ? read_photons_csv(photons_file)
                                             : read_photons_binary(photons_file);
  const std::size_t hits_in = hits.size();

  hits = correct_hits(std::move(hits), cfg.generator.column_offsets_ns,
                      cfg.generator.defective_pixels);
  const std::vector<ClusterEvent> clusters =
      cluster_hits(hits, cfg.analysis.cluster);
  const CrossCorrHistogram hist =
      cross_correlate(clusters, photons, cfg.analysis.correlate);
  write_histogram_file(cfg, hist);

  json report;
  report["config_hash"] = hash_hex(cfg.config_hash);
  report["inputs"] = {{"electrons", electrons_file},
                      {"photons", photons_file},
                      {"truth", truth_file.empty() ? json(nullptr)
                                                   : json(truth_file)}};
  report["counts"] = {{"hits_read", hits_in},
                      {"hits_after_correction", hits.size()},
                      {"clusters", clusters.size()},
                      {"photons", photons.size()},
                      {"histogram_total", hist.total()}};

  if (hist.total() == 0) {
    report["no_signal"] = true;
    write_json_file(cfg, "report.json", report);
    std::printf("analyze: no correlated signal in the input streams\n");
    return opts.strict ? exit_warnings : exit_ok;
  }
  report["no_signal"] = false;

  const double delay = estimate_delay(hist);
  const double fwhm = peak_fwhm(hist);
  report["delay_ns"] = delay;
  report["delay_uncertainty_ns"] = hist.bin_width_ns / 2.0;
  report["peak_fwhm_ns"] = fwhm;

  const std::vector<CoincidencePair> pairs =
      match_coincidences(clusters, photons, delay, cfg.analysis.tau_ns,
                         cfg.analysis.exclusive);
  const std::vector<CoincidencePair> background =
      background_pairs(clusters, photons, delay, cfg.analysis.tau_ns,
                       cfg.analysis.background_offset_ns,
                       cfg.analysis.exclusive);
  const auto classified_count = [](const std::vector<CoincidencePair>& v) {
    return static_cast<std::uint64_t>(
        std::count_if(v.begin(), v.end(),
                      [](const CoincidencePair& p) { return p.classified; }));
  };
  const std::uint64_t n_coin = classified_count(pairs);
  const std::uint64_t n_false = classified_count(background);

  double t_first = photons.empty() ? 0.0 : photons.front().t_ns;
  double t_last = photons.empty() ? 0.0 : photons.back().t_ns;
  if (!clusters.empty()) {
    t_first = std::min(t_first, clusters.front().t_ns);
    t_last = std::max(t_last, clusters.back().t_ns);
  }
  const double live_time_s = (t_last - t_first) * 1e-9;
  report["live_time_s"] = live_time_s;
  report["n_coincidences"] = n_coin;
  report["n_background"] = n_false;

  // coincidence image over the matched electron positions
  {
    const std::vector<ClusterEvent> corrected =
        drift_correct(clusters, cfg.analysis.drift_window_s);
    const std::size_t px = cfg.generator.pixels;
    const double pitch =
        2.0 * cfg.generator.half_span_urad / static_cast<double>(px);
    const double center = (static_cast<double>(px) - 1.0) / 2.0;
    Matrix img(px, px);
    for (const CoincidencePair& p : pairs) {
      if (!p.classified)
        continue;
      const ClusterEvent& e = corrected[p.electron_index];
      const long long ix = std::llround(e.x);
      const long long iy = std::llround(e.y);
      if (ix < 0 || iy < 0 || ix >= static_cast<long long>(px) ||
          iy >= static_cast<long long>(px))
        continue;
      img(static_cast<std::size_t>(iy), static_cast<std::size_t>(ix)) += 1.0;
    }
    MatrixMeta meta;
    meta.row_axis = "theta_y_urad";
    meta.col_axis = "theta_x_urad";
    meta.units = "counts";
    meta.config_hash = cfg.config_hash;
    meta.row_values.resize(px);
    meta.col_values.resize(px);
    for (std::size_t i = 0; i < px; ++i) {
      meta.row_values[i] = (static_cast<double>(i) - center) * pitch;
      meta.col_values[i] = meta.row_values[i];
    }
    write_matrix_text(out_path(cfg, "coincidence_image.txt"), img, meta);
  }

  // truth-derived quantities when labels are available
  std::uint64_t n_eftem = opts.eftem_count.value_or(0);
  if (!truth_file.empty()) {
    const GroundTruth truth = read_truth(truth_file);
    std::vector<const TruthPair*> by_photon(photons.size(), nullptr);
    for (const TruthPair& p : truth.pairs)
      if (p.photon_id < by_photon.size())
        by_photon[p.photon_id] = &p;

    std::uint64_t n_true = 0;
    for (const CoincidencePair& p : pairs) {
      if (!p.classified)
        continue;
      const TruthPair* tp = p.photon_index < by_photon.size()
                                ? by_photon[p.photon_index]
                                : nullptr;
      if (tp && tp->electron_detected &&
          std::abs(clusters[p.electron_index].t_ns - tp->electron_toa_ns) <=
              3.0)
        ++n_true;
    }
    json truth_block;
    truth_block["pairs_total"] = truth.pairs.size();
    truth_block["classified_true"] = n_true;
    truth_block["classified_total"] = n_coin;
    if (n_coin > n_true)
      truth_block["car_truth"] = static_cast<double>(n_true) /
                                 static_cast<double>(n_coin - n_true);
    else
      truth_block["car_truth"] = nullptr;
    report["truth"] = truth_block;

    if (!opts.eftem_count && cfg.energy_filter.enabled) {
      std::uint64_t count = 0;
      for (const TruthPair& p : truth.pairs) {
        if (!p.electron_detected)
          continue;
        if (electron_filter_weight(cfg.energy_filter, p.energy_eV) <= 0.0)
          continue;
        const double q = std::hypot(p.qx_per_nm, p.qy_per_nm);
        if (q <= p.energy_eV / constants::hbar_c_eV_nm)
          ++count;
      }
      n_eftem = count;
    }
  }

  const MetricsReport metrics =
      compute_metrics(n_coin, n_false, n_eftem, live_time_s,
                      cfg.analysis.metrics);
  json mj;
  mj["r_coin_per_s"] = metrics.r_coin_per_s;
  mj["r_false_per_s"] = metrics.r_false_per_s;
  mj["r_true_per_s"] = metrics.r_true_per_s;
  mj["car"] = metrics.car_infinite ? json(nullptr) : json(metrics.car);
  mj["car_infinite"] = metrics.car_infinite;
  mj["true_rate_clamped"] = metrics.true_rate_clamped;
  if (n_false > 0) {
    const double c = static_cast<double>(n_coin);
    const double b = static_cast<double>(n_false);
    mj["car_sigma"] = std::sqrt(c / (b * b) + c * c / (b * b * b));
  } else {
    mj["car_sigma"] = nullptr;
  }
  mj["p_photon_given_coincidence"] = metrics.p_photon_given_coincidence;
  mj["r_eftem_per_s"] = metrics.r_eftem_per_s;
  mj["eftem_defined"] = metrics.eftem_defined;
  if (metrics.eftem_defined) {
    mj["p_photon_given_eftem"] = metrics.p_photon_given_eftem;
    mj["enhancement_a"] = metrics.enhancement_a;
  } else {
    mj["p_photon_given_eftem"] = nullptr;
    mj["enhancement_a"] = nullptr;
  }
  report["metrics"] = mj;

  write_json_file(cfg, "report.json", report);
  std::printf("analyze: delay %.3f ns, fwhm %.2f ns, %llu coincidences, "
              "%llu background\n",
              delay, fwhm, static_cast<unsigned long long>(n_coin),
              static_cast<unsigned long long>(n_false));
  return exit_ok;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"transition-radiation electron-photon coincidence toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  double duration_override = 0.0;
  bool duration_given = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "run configuration (JSON)")
        ->required();
    sub->add_option("--out", out_override, "output directory override");
  };

  CLI::App* pm = app.add_subcommand(
      "physics-map", "write loss and radiative density maps plus rate curves");
  add_common(pm);

  CLI::App* lad = app.add_subcommand(
      "lad", "synthesize a deflection-angle image and radial profile");
  add_common(lad);
  std::string mode_override, photon_filter;
  double energy_center = 0.0, energy_halfwidth = 0.0;
  bool coincidence_flag = false, ec_given = false, eh_given = false;
  lad->add_option("--mode", mode_override, "plain or coincidence");
  lad->add_flag("--coincidence", coincidence_flag,
                "shorthand for --mode coincidence");
  lad->add_option("--energy-center", energy_center,
                  "enable the electron energy filter at this center (eV)")
      ->each([&](const std::string&) { ec_given = true; });
  lad->add_option("--energy-halfwidth", energy_halfwidth,
                  "electron energy filter halfwidth (eV)")
      ->each([&](const std::string&) { eh_given = true; });
  lad->add_option("--photon-filter", photon_filter,
                  "photon bandpass center:fwhm in nm, e.g. 550:40");

  CLI::App* sim = app.add_subcommand(
      "simulate", "generate a synthetic event stream with ground truth");
  add_common(sim);
  sim->add_option("--seed", seed_override, "RNG seed override")
      ->each([&](const std::string&) { seed_given = true; });
  sim->add_option("--duration", duration_override, "duration override (s)")
      ->each([&](const std::string&) { duration_given = true; });
  bool also_csv = false;
  sim->add_flag("--csv", also_csv, "also write CSV copies of the streams");

  CLI::App* ana = app.add_subcommand(
      "analyze", "run the coincidence analysis chain over an event stream");
  add_common(ana);
  AnalyzeOptions aopts;
  std::uint64_t eftem_count = 0;
  bool eftem_given = false;
  ana->add_option("--electrons", aopts.electrons_file, "electron hits file");
  ana->add_option("--photons", aopts.photons_file, "photon tags file");
  ana->add_option("--truth", aopts.truth_file, "ground-truth JSONL file");
  ana->add_option("--eftem-count", eftem_count,
                  "energy-filtered electron count for the enhancement factor")
      ->each([&](const std::string&) { eftem_given = true; });
  ana->add_flag("--strict", aopts.strict,
                "exit 1 when the analysis finds no signal");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    RunConfig cfg = load_run_config(config_path);
    if (!out_override.empty())
      cfg.output_dir = out_override;
    if (seed_given) {
      cfg.seed = seed_override;
      cfg.generator.seed = seed_override;
    }
    if (duration_given)
      cfg.generator.duration_s = duration_override;

    if (pm->parsed())
      return cmd_physics_map(cfg);
    if (lad->parsed()) {
      if (!mode_override.empty()) {
        if (mode_override == "plain")
          cfg.image_mode = LadMode::plain;
        else if (mode_override == "coincidence")
          cfg.image_mode = LadMode::coincidence;
        else
          throw config_error("--mode must be plain or coincidence");
      }
      if (coincidence_flag)
        cfg.image_mode = LadMode::coincidence;
      if (ec_given) {
        cfg.energy_filter.enabled = true;
        cfg.energy_filter.center_eV = energy_center;
      }
      if (eh_given) {
        cfg.energy_filter.enabled = true;
        cfg.energy_filter.halfwidth_eV = energy_halfwidth;
      }
      if (!photon_filter.empty()) {
        const std::size_t colon = photon_filter.find(':');
        if (colon == std::string::npos)
          throw config_error("--photon-filter expects center:fwhm");
        try {
          cfg.bandpass.center_nm = std::stod(photon_filter.substr(0, colon));
          cfg.bandpass.fwhm_nm = std::stod(photon_filter.substr(colon + 1));
        } catch (const std::exception&) {
          throw config_error("--photon-filter expects numeric center:fwhm");
        }
        cfg.bandpass.enabled = true;
      }
      if (cfg.energy_filter.enabled && !(cfg.energy_filter.halfwidth_eV > 0))
        throw validation_error("electron filter halfwidth must be > 0");
      if (cfg.bandpass.enabled &&
          (!(cfg.bandpass.center_nm > 0) || !(cfg.bandpass.fwhm_nm > 0)))
        throw validation_error("photon bandpass needs positive center and "
                               "fwhm");
      return cmd_lad(cfg);
    }
    if (sim->parsed())
      return cmd_simulate(cfg, also_csv);
    if (ana->parsed()) {
      if (eftem_given)
        aopts.eftem_count = eftem_count;
      return cmd_analyze(cfg, aopts);
    }
    return exit_config;
  } catch (const numerical_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_numeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_config;
  }
}

} // namespace coinccl
