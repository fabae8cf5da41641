#include "coinccl/config.hpp"

#include <algorithm>
#include <filesystem>
#include <initializer_list>

#include <json.hpp>

#include "coinccl/errors.hpp"
#include "coinccl/io.hpp"

namespace coinccl {

namespace {

using nlohmann::json;

std::string join_key(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw config_error("'" + (path.empty() ? std::string("<root>") : path) +
                       "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return it.key() == k; });
    if (!known)
      throw config_error("unknown key '" + join_key(path, it.key()) + "'");
  }
}

void get_num(const json& j, const std::string& path, const char* key,
             double& out) {
  if (!j.contains(key))
    return;
  const json& v = j.at(key);
  if (!v.is_number())
    throw config_error("'" + join_key(path, key) + "' must be a number");
  out = v.get<double>();
}

void get_size(const json& j, const std::string& path, const char* key,
              std::size_t& out) {
  if (!j.contains(key))
    return;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw config_error("'" + join_key(path, key) +
                       "' must be a nonnegative integer");
  out = static_cast<std::size_t>(v.get<long long>());
}

void get_u64(const json& j, const std::string& path, const char* key,
             std::uint64_t& out) {
  if (!j.contains(key))
    return;
  const json& v = j.at(key);
  if (!v.is_number_integer() ||
      (v.is_number_integer() && !v.is_number_unsigned() &&
       v.get<long long>() < 0))
    throw config_error("'" + join_key(path, key) +
                       "' must be a nonnegative integer");
  out = v.get<std::uint64_t>();
}

void get_bool(const json& j, const std::string& path, const char* key,
              bool& out) {
  if (!j.contains(key))
    return;
  const json& v = j.at(key);
  if (!v.is_boolean())
    throw config_error("'" + join_key(path, key) + "' must be a boolean");
  out = v.get<bool>();
}

void get_str(const json& j, const std::string& path, const char* key,
             std::string& out) {
  if (!j.contains(key))
    return;
  const json& v = j.at(key);
  if (!v.is_string())
    throw config_error("'" + join_key(path, key) + "' must be a string");
  out = v.get<std::string>();
}

void parse_mirror(const json& j, const std::string& path, MirrorSpec& m) {
  reject_unknown(j, path,
                 {"kind", "theta_min_rad", "theta_max_rad", "gap_center_rad",
                  "gap_halfwidth_rad", "shading_polygons", "file"});
  get_str(j, path, "kind", m.kind);
  if (m.kind != "parametric" && m.kind != "tabulated" && m.kind != "full-disk")
    throw config_error("'" + join_key(path, "kind") +
                       "' must be parametric, tabulated or full-disk");
  get_num(j, path, "theta_min_rad", m.theta_min_rad);
  get_num(j, path, "theta_max_rad", m.theta_max_rad);
  get_num(j, path, "gap_center_rad", m.gap_center_rad);
  get_num(j, path, "gap_halfwidth_rad", m.gap_halfwidth_rad);
  get_str(j, path, "file", m.file);
  if (j.contains("shading_polygons")) {
    const json& polys = j.at("shading_polygons");
    if (!polys.is_array())
      throw config_error("'" + join_key(path, "shading_polygons") +
                         "' must be an array of polygons");
    for (const json& poly : polys) {
      if (!poly.is_array() || poly.size() < 3)
        throw config_error("'" + join_key(path, "shading_polygons") +
                           "' entries must be arrays of >= 3 [theta,phi]");
      std::vector<std::array<double, 2>> out;
      for (const json& vertex : poly) {
        if (!vertex.is_array() || vertex.size() != 2 ||
            !vertex[0].is_number() || !vertex[1].is_number())
          throw config_error("'" + join_key(path, "shading_polygons") +
                             "' vertices must be [theta,phi] numbers");
        out.push_back({vertex[0].get<double>(), vertex[1].get<double>()});
      }
      m.shading_polygons.push_back(std::move(out));
    }
  }
  if (m.kind == "tabulated" && m.file.empty())
    throw config_error("'" + join_key(path, "file") +
                       "' is required for a tabulated mirror");
}

void parse_energy_filter(const json& j, const std::string& path,
                         ElectronEnergyFilter& f) {
  reject_unknown(j, path, {"enabled", "center_eV", "halfwidth_eV"});
  get_bool(j, path, "enabled", f.enabled);
  get_num(j, path, "center_eV", f.center_eV);
  get_num(j, path, "halfwidth_eV", f.halfwidth_eV);
  if (f.enabled && !(f.halfwidth_eV > 0))
    throw validation_error("'" + join_key(path, "halfwidth_eV") +
                           "' must be > 0 when the filter is enabled");
}

void parse_bandpass(const json& j, const std::string& path, PhotonBandpass& b) {
  reject_unknown(j, path, {"enabled", "center_nm", "fwhm_nm"});
  get_bool(j, path, "enabled", b.enabled);
  get_num(j, path, "center_nm", b.center_nm);
  get_num(j, path, "fwhm_nm", b.fwhm_nm);
  if (b.enabled && (!(b.fwhm_nm > 0) || !(b.center_nm > 0)))
    throw validation_error("'" + path +
                           "' needs positive center_nm and fwhm_nm");
}

void parse_generator(const json& j, const std::string& path,
                     GeneratorConfig& g) {
  reject_unknown(
      j, path,
      {"duration_s", "electron_rate_per_s", "pair_detect_prob",
       "electron_accept_prob", "delay_mean_ns", "delay_fwhm_ns",
       "toa_quantum_ns", "photon_quantum_ns", "mean_cluster_size",
       "background_photon_rate_per_s", "dark_rate_per_s", "column_offsets_ns",
       "defective_pixels", "drift_velocity_px_per_s", "pixels",
       "half_span_urad", "zero_loss_sigma_urad", "zero_loss_energy_fwhm_eV",
       "cluster_spread_ns", "tot_median_ns", "tot_sigma_log",
       "tot_quantum_ns"});
  get_num(j, path, "duration_s", g.duration_s);
  get_num(j, path, "electron_rate_per_s", g.electron_rate_per_s);
  get_num(j, path, "pair_detect_prob", g.pair_detect_prob);
  get_num(j, path, "electron_accept_prob", g.electron_accept_prob);
  get_num(j, path, "delay_mean_ns", g.delay_mean_ns);
  get_num(j, path, "delay_fwhm_ns", g.delay_fwhm_ns);
  get_num(j, path, "toa_quantum_ns", g.toa_quantum_ns);
  get_num(j, path, "photon_quantum_ns", g.photon_quantum_ns);
  get_num(j, path, "mean_cluster_size", g.mean_cluster_size);
  get_num(j, path, "background_photon_rate_per_s",
          g.background_photon_rate_per_s);
  get_num(j, path, "dark_rate_per_s", g.dark_rate_per_s);
  get_num(j, path, "drift_velocity_px_per_s", g.drift_velocity_px_per_s);
  std::size_t pixels = g.pixels;
  get_size(j, path, "pixels", pixels);
  g.pixels = static_cast<std::uint32_t>(pixels);
  get_num(j, path, "half_span_urad", g.half_span_urad);
  get_num(j, path, "zero_loss_sigma_urad", g.zero_loss_sigma_urad);
  get_num(j, path, "zero_loss_energy_fwhm_eV", g.zero_loss_energy_fwhm_eV);
  get_num(j, path, "cluster_spread_ns", g.cluster_spread_ns);
  get_num(j, path, "tot_median_ns", g.tot_median_ns);
  get_num(j, path, "tot_sigma_log", g.tot_sigma_log);
  get_num(j, path, "tot_quantum_ns", g.tot_quantum_ns);

  if (j.contains("column_offsets_ns")) {
    const json& a = j.at("column_offsets_ns");
    if (!a.is_array())
      throw config_error("'" + join_key(path, "column_offsets_ns") +
                         "' must be an array of numbers");
    for (const json& v : a) {
      if (!v.is_number())
        throw config_error("'" + join_key(path, "column_offsets_ns") +
                           "' must be an array of numbers");
      g.column_offsets_ns.push_back(v.get<double>());
    }
  }
  if (j.contains("defective_pixels")) {
    const json& a = j.at("defective_pixels");
    if (!a.is_array())
      throw config_error("'" + join_key(path, "defective_pixels") +
                         "' must be an array of [x,y] pairs");
    for (const json& v : a) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
          !v[1].is_number_integer())
        throw config_error("'" + join_key(path, "defective_pixels") +
                           "' must be an array of [x,y] integer pairs");
      g.defective_pixels.push_back(
          {static_cast<std::uint16_t>(v[0].get<unsigned>()),
           static_cast<std::uint16_t>(v[1].get<unsigned>())});
    }
  }
}

void parse_analysis(const json& j, const std::string& path, AnalysisConfig& a) {
  reject_unknown(j, path,
                 {"cluster", "correlate", "tau_ns", "background_offset_ns",
                  "drift_window_s", "exclusive", "metrics"});
  if (j.contains("cluster")) {
    const std::string p = join_key(path, "cluster");
    reject_unknown(j.at("cluster"), p, {"eps", "time_unit_ns", "tot_cut_ns"});
    get_num(j.at("cluster"), p, "eps", a.cluster.eps);
    get_num(j.at("cluster"), p, "time_unit_ns", a.cluster.time_unit_ns);
    get_num(j.at("cluster"), p, "tot_cut_ns", a.cluster.tot_cut_ns);
  }
  if (j.contains("correlate")) {
    const std::string p = join_key(path, "correlate");
    reject_unknown(j.at("correlate"), p,
                   {"window_ns", "bin_ns", "guard_ns", "interval_s"});
    get_num(j.at("correlate"), p, "window_ns", a.correlate.window_ns);
    get_num(j.at("correlate"), p, "bin_ns", a.correlate.bin_ns);
    get_num(j.at("correlate"), p, "guard_ns", a.correlate.guard_ns);
    get_num(j.at("correlate"), p, "interval_s", a.correlate.interval_s);
  }
  get_num(j, path, "tau_ns", a.tau_ns);
  get_num(j, path, "background_offset_ns", a.background_offset_ns);
  get_num(j, path, "drift_window_s", a.drift_window_s);
  get_bool(j, path, "exclusive", a.exclusive);
  if (j.contains("metrics")) {
    const std::string p = join_key(path, "metrics");
    reject_unknown(j.at("metrics"), p,
                   {"p_coh_in_window", "alpha_e", "beam_rate_per_s"});
    get_num(j.at("metrics"), p, "p_coh_in_window",
            a.metrics.p_coh_in_window);
    get_num(j.at("metrics"), p, "alpha_e", a.metrics.alpha_e);
    get_num(j.at("metrics"), p, "beam_rate_per_s", a.metrics.beam_rate_per_s);
  }
}

void validate_run_config(const RunConfig& c) {
  if (!(c.thickness_nm > 0))
    throw validation_error("'thickness_nm' must be > 0");
  if (!(c.beam_energy_eV > 0))
    throw validation_error("'beam_energy_eV' must be > 0");
  if (c.mirror.kind != "tabulated") {
    if (!(c.mirror.theta_min_rad >= 0) ||
        !(c.mirror.theta_max_rad > c.mirror.theta_min_rad) ||
        !(c.mirror.theta_max_rad <= 1.5707963267948966 + 1e-12))
      throw validation_error(
          "'collection.mirror' needs 0 <= theta_min < theta_max <= pi/2");
  }
  if (!(c.map_energy_min_eV > 0) ||
      !(c.map_energy_max_eV > c.map_energy_min_eV) ||
      !(c.map_energy_step_eV > 0))
    throw validation_error("'map' energy range must satisfy 0 < min < max "
                           "with a positive step");
  if (c.map_q_points < 2)
    throw validation_error("'map.q_points' must be >= 2");
  if (c.map_resolution.energy_fwhm_eV < 0 || c.map_resolution.q_fwhm_per_nm < 0)
    throw validation_error("'map' resolution widths must be >= 0");
  if (c.image.pixels < 2 || !(c.image.half_span_urad > 0))
    throw validation_error("'image' needs pixels >= 2 and a positive span");
  if (!(c.analysis.tau_ns > 0))
    throw validation_error("'analysis.tau_ns' must be > 0");
  if (!(c.analysis.drift_window_s > 0))
    throw validation_error("'analysis.drift_window_s' must be > 0");
  if (!(c.analysis.cluster.eps > 0) ||
      !(c.analysis.cluster.time_unit_ns > 0))
    throw validation_error("'analysis.cluster' needs positive eps and "
                           "time_unit_ns");
  if (!(c.analysis.correlate.window_ns > 0) ||
      !(c.analysis.correlate.bin_ns > 0) ||
      c.analysis.correlate.guard_ns < 0 ||
      !(c.analysis.correlate.interval_s > 0))
    throw validation_error("'analysis.correlate' parameters out of range");
  validate(c.generator);
}

} // namespace

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  if (path.empty() || base_dir.empty())
    return path;
  std::filesystem::path p(path);
  if (p.is_absolute())
    return path;
  return (std::filesystem::path(base_dir) / p).string();
}

RunConfig parse_run_config(const std::string& json_text,
                           const std::string& source_name,
                           const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw parse_error(e.what(), source_name, 0);
  }

  RunConfig c;
  c.base_dir = base_dir;
  reject_unknown(j, "",
                 {"dielectric_file", "thickness_nm", "beam_energy_eV",
                  "collection", "filters", "map", "image", "generator",
                  "analysis", "output_dir", "seed"});
  get_str(j, "", "dielectric_file", c.dielectric_file);
  get_num(j, "", "thickness_nm", c.thickness_nm);
  get_num(j, "", "beam_energy_eV", c.beam_energy_eV);

  if (j.contains("collection")) {
    const json& col = j.at("collection");
    reject_unknown(col, "collection", {"mirror", "fiber_file", "detector_file"});
    if (col.contains("mirror"))
      parse_mirror(col.at("mirror"), "collection.mirror", c.mirror);
    get_str(col, "collection", "fiber_file", c.fiber_file);
    get_str(col, "collection", "detector_file", c.detector_file);
  }

  if (j.contains("filters")) {
    const json& f = j.at("filters");
    reject_unknown(f, "filters", {"energy", "bandpass"});
    if (f.contains("energy"))
      parse_energy_filter(f.at("energy"), "filters.energy", c.energy_filter);
    if (f.contains("bandpass"))
      parse_bandpass(f.at("bandpass"), "filters.bandpass", c.bandpass);
  }

  if (j.contains("map")) {
    const json& m = j.at("map");
    reject_unknown(m, "map",
                   {"energy_min_eV", "energy_max_eV", "energy_step_eV",
                    "q_points", "energy_fwhm_eV", "q_fwhm_per_nm"});
    get_num(m, "map", "energy_min_eV", c.map_energy_min_eV);
    get_num(m, "map", "energy_max_eV", c.map_energy_max_eV);
    get_num(m, "map", "energy_step_eV", c.map_energy_step_eV);
    get_size(m, "map", "q_points", c.map_q_points);
    get_num(m, "map", "energy_fwhm_eV", c.map_resolution.energy_fwhm_eV);
    get_num(m, "map", "q_fwhm_per_nm", c.map_resolution.q_fwhm_per_nm);
  }

  if (j.contains("image")) {
    const json& im = j.at("image");
    reject_unknown(im, "image",
                   {"pixels", "half_span_urad", "mode", "zero_loss"});
    get_size(im, "image", "pixels", c.image.pixels);
    get_num(im, "image", "half_span_urad", c.image.half_span_urad);
    std::string mode = "plain";
    get_str(im, "image", "mode", mode);
    if (mode == "plain")
      c.image_mode = LadMode::plain;
    else if (mode == "coincidence")
      c.image_mode = LadMode::coincidence;
    else
      throw config_error("'image.mode' must be plain or coincidence");
    if (im.contains("zero_loss")) {
      const json& z = im.at("zero_loss");
      reject_unknown(z, "image.zero_loss",
                     {"enabled", "amplitude", "sigma_urad"});
      get_bool(z, "image.zero_loss", "enabled", c.zero_loss.enabled);
      get_num(z, "image.zero_loss", "amplitude", c.zero_loss.amplitude);
      get_num(z, "image.zero_loss", "sigma_urad", c.zero_loss.sigma_urad);
      if (c.zero_loss.enabled &&
          (c.zero_loss.amplitude < 0 || !(c.zero_loss.sigma_urad > 0)))
        throw validation_error("'image.zero_loss' needs amplitude >= 0 and "
                               "sigma_urad > 0");
    }
  }

  if (j.contains("generator"))
    parse_generator(j.at("generator"), "generator", c.generator);
  if (j.contains("analysis"))
    parse_analysis(j.at("analysis"), "analysis", c.analysis);
  get_str(j, "", "output_dir", c.output_dir);
  get_u64(j, "", "seed", c.seed);

  c.dielectric_file = resolve_path(base_dir, c.dielectric_file);
  c.fiber_file = resolve_path(base_dir, c.fiber_file);
  c.detector_file = resolve_path(base_dir, c.detector_file);
  c.mirror.file = resolve_path(base_dir, c.mirror.file);

  c.generator.seed = c.seed;
  c.generator.energy_filter = c.energy_filter;

  c.canonical = j.dump();
  c.config_hash = fnv1a(c.canonical);

  validate_run_config(c);
  return c;
}

RunConfig load_run_config(const std::string& path) {
  const std::string text = read_text_file(path);
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_run_config(text, path, base);
}

} // namespace coinccl
