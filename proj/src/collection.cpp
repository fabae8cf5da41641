#include "coinccl/collection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "coinccl/constants.hpp"
#include "coinccl/errors.hpp"

namespace coinccl {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// wrap into (-pi, pi]
double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi)
    a += 2.0 * kPi;
  else if (a > kPi)
    a -= 2.0 * kPi;
  return a;
}

bool point_in_polygon(const std::vector<std::array<double, 2>>& poly,
                      double theta, double phi) {
  if (poly.size() < 3)
    return false;
  bool inside = false;
  std::size_t j = poly.size() - 1;
  for (std::size_t i = 0; i < poly.size(); j = i++) {
    const double ti = poly[i][0], pi = poly[i][1];
    const double tj = poly[j][0], pj = poly[j][1];
    if ((pi > phi) != (pj > phi)) {
      const double cross = (tj - ti) * (phi - pi) / (pj - pi) + ti;
      if (theta < cross)
        inside = !inside;
    }
  }
  return inside;
}

bool looks_like_header(const std::string& line) {
  for (char c : line) {
    if (std::isalpha(static_cast<unsigned char>(c)))
      return true;
    if (std::isdigit(static_cast<unsigned char>(c)))
      return false;
  }
  return false;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw io_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

EfficiencyCurve EfficiencyCurve::from_samples(std::vector<double> energy_eV,
                                              std::vector<double> value) {
  if (energy_eV.size() != value.size())
    throw validation_error("efficiency curve: axis/value size mismatch");
  if (energy_eV.size() < 2)
    throw validation_error("efficiency curve: need at least 2 samples");
  for (std::size_t i = 0; i < energy_eV.size(); ++i) {
    if (!std::isfinite(energy_eV[i]) || !std::isfinite(value[i]))
      throw validation_error("efficiency curve: non-finite sample");
    if (i > 0 && energy_eV[i] <= energy_eV[i - 1])
      throw validation_error(
          "efficiency curve: energies not strictly increasing");
    if (value[i] < 0.0 || value[i] > 1.0)
      throw validation_error("efficiency curve: value outside [0,1]");
  }
  EfficiencyCurve c;
  c.energy_ = std::move(energy_eV);
  c.value_ = std::move(value);
  return c;
}

EfficiencyCurve EfficiencyCurve::load_csv(const std::string& text,
                                          const std::string& name) {
  std::vector<double> e, v;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
    if (trimmed.empty() || trimmed[0] == '#')
      continue;
    if (!seen_data && looks_like_header(trimmed))
      continue;
    std::replace(trimmed.begin(), trimmed.end(), ',', ' ');
    std::istringstream row(trimmed);
    double energy = 0.0, value = 0.0;
    if (!(row >> energy >> value))
      throw parse_error("malformed efficiency row", name,
                        static_cast<long>(lineno));
    e.push_back(energy);
    v.push_back(value);
    seen_data = true;
  }
  return from_samples(std::move(e), std::move(v));
}

EfficiencyCurve EfficiencyCurve::load_csv_file(const std::string& path) {
  return load_csv(read_file(path), path);
}

double EfficiencyCurve::operator()(double energy_eV) const {
  if (!(energy_eV >= energy_.front() && energy_eV <= energy_.back()))
    throw domain_error("efficiency energy outside table range", energy_eV);
  auto it = std::upper_bound(energy_.begin(), energy_.end(), energy_eV);
  if (it == energy_.end())
    return value_.back();
  const std::size_t hi = static_cast<std::size_t>(it - energy_.begin());
  if (hi == 0)
    return value_.front();
  const std::size_t lo = hi - 1;
  const double t = (energy_eV - energy_[lo]) / (energy_[hi] - energy_[lo]);
  return value_[lo] + t * (value_[hi] - value_[lo]);
}

MirrorModel MirrorModel::horseshoe() { return MirrorModel{}; }

MirrorModel MirrorModel::full_disk() {
  MirrorModel m;
  m.theta_min_rad = 0.0;
  m.theta_max_rad = kPi / 2.0;
  m.gap_halfwidth_rad = -1.0;
  return m;
}

MirrorModel MirrorModel::tabulated_from_csv(const std::string& text,
                                            const std::string& name) {
  std::map<double, std::map<double, double>> rows;  // y -> x -> value
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
    if (trimmed.empty() || trimmed[0] == '#')
      continue;
    if (!seen_data && looks_like_header(trimmed))
      continue;
    std::replace(trimmed.begin(), trimmed.end(), ',', ' ');
    std::istringstream row(trimmed);
    double x = 0.0, y = 0.0, v = 0.0;
    if (!(row >> x >> y >> v))
      throw parse_error("malformed mirror grid row", name,
                        static_cast<long>(lineno));
    rows[y][x] = v;
    seen_data = true;
  }
  if (rows.size() < 2)
    throw validation_error("tabulated mirror: need at least a 2x2 grid");

  MirrorModel m;
  m.variant = MirrorVariant::tabulated;
  for (const auto& [y, _] : rows)
    m.grid_y.push_back(y);
  for (const auto& [x, _] : rows.begin()->second)
    m.grid_x.push_back(x);
  if (m.grid_x.size() < 2)
    throw validation_error("tabulated mirror: need at least a 2x2 grid");
  m.values = Matrix(m.grid_y.size(), m.grid_x.size());
  std::size_t r = 0;
  for (const auto& [y, cols] : rows) {
    if (cols.size() != m.grid_x.size())
      throw validation_error("tabulated mirror: ragged grid");
    std::size_t c = 0;
    for (const auto& [x, v] : cols) {
      if (x != m.grid_x[c])
        throw validation_error("tabulated mirror: ragged grid");
      if (!(v >= 0.0 && v <= 1.0))
        throw validation_error("tabulated mirror: value outside [0,1]");
      m.values(r, c) = v;
      ++c;
    }
    ++r;
  }
  return m;
}

MirrorModel MirrorModel::tabulated_from_csv_file(const std::string& path) {
  return tabulated_from_csv(read_file(path), path);
}

double mirror_acceptance(const MirrorModel& model, double khat_x,
                         double khat_y) {
  const double r = std::hypot(khat_x, khat_y);
  if (r > 1.0)
    throw domain_error("mirror direction outside the unit disk", r);

  if (model.variant == MirrorVariant::tabulated) {
    const auto& xs = model.grid_x;
    const auto& ys = model.grid_y;
    if (khat_x < xs.front() || khat_x > xs.back() || khat_y < ys.front() ||
        khat_y > ys.back())
      return 0.0;
    auto cell = [](const std::vector<double>& axis, double v) {
      auto it = std::upper_bound(axis.begin(), axis.end(), v);
      std::size_t hi = static_cast<std::size_t>(it - axis.begin());
      if (hi == axis.size())
        --hi;
      if (hi == 0)
        hi = 1;
      return hi;
    };
    const std::size_t cx = cell(xs, khat_x);
    const std::size_t cy = cell(ys, khat_y);
    const double tx = (khat_x - xs[cx - 1]) / (xs[cx] - xs[cx - 1]);
    const double ty = (khat_y - ys[cy - 1]) / (ys[cy] - ys[cy - 1]);
    const double v00 = model.values(cy - 1, cx - 1);
    const double v01 = model.values(cy - 1, cx);
    const double v10 = model.values(cy, cx - 1);
    const double v11 = model.values(cy, cx);
    const double v = (1.0 - ty) * ((1.0 - tx) * v00 + tx * v01) +
                     ty * ((1.0 - tx) * v10 + tx * v11);
    return std::clamp(v, 0.0, 1.0);
  }

  const double theta = std::asin(std::min(r, 1.0));
  if (theta < model.theta_min_rad || theta > model.theta_max_rad)
    return 0.0;
  const double phi = std::atan2(khat_y, khat_x);
  if (model.gap_halfwidth_rad >= 0.0 &&
      std::abs(wrap_angle(phi - model.gap_center_rad)) <=
          model.gap_halfwidth_rad)
    return 0.0;
  for (const auto& poly : model.shading_polygons)
    if (point_in_polygon(poly, theta, phi))
      return 0.0;
  return 1.0;
}

double photon_efficiency(const MirrorModel& model,
                         const EfficiencyCurves& curves, double energy_eV,
                         double khat_x, double khat_y) {
  const double a = mirror_acceptance(model, khat_x, khat_y);
  return a * curves.fiber(energy_eV) * curves.detector(energy_eV);
}

double electron_filter_weight(const ElectronEnergyFilter& filter,
                              double energy_eV) {
  if (!filter.enabled)
    return 1.0;
  return std::abs(energy_eV - filter.center_eV) <= filter.halfwidth_eV ? 1.0
                                                                       : 0.0;
}

double bandpass_weight(const PhotonBandpass& bandpass, double energy_eV) {
  if (energy_eV <= 0.0)
    throw domain_error("photon energy must be positive", energy_eV);
  if (!bandpass.enabled)
    return 1.0;
  const double lambda_nm = constants::photon_eV_nm / energy_eV;
  return std::abs(lambda_nm - bandpass.center_nm) <= 0.5 * bandpass.fwhm_nm
             ? 1.0
             : 0.0;
}

}  // namespace coinccl
