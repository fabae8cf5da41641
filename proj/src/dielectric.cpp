#include "coinccl/dielectric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "coinccl/errors.hpp"

namespace coinccl {

DielectricTable DielectricTable::from_samples(std::vector<DielectricSample> samples) {
  if (samples.size() < 2)
    throw validation_error("dielectric table needs at least two samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i > 0 && !(samples[i].energy_eV > samples[i - 1].energy_eV))
      throw validation_error("dielectric table energies must be strictly increasing near " +
                             std::to_string(samples[i].energy_eV) + " eV");
    if (samples[i].eps_im < 0.0)
      throw validation_error("dielectric table has eps_im < 0 at " +
                             std::to_string(samples[i].energy_eV) + " eV");
    if (!std::isfinite(samples[i].energy_eV) || !std::isfinite(samples[i].eps_re) ||
        !std::isfinite(samples[i].eps_im))
      throw validation_error("dielectric table has a non-finite entry");
  }
  DielectricTable t;
  t.mSamples = std::move(samples);
  return t;
}

DielectricTable DielectricTable::load_csv(std::istream& in, const std::string& name) {
  std::vector<DielectricSample> samples;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t beg = line.find_first_not_of(" \t\r");
    if (beg == std::string::npos || line[beg] == '#')
      continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    DielectricSample s{};
    if (!(ss >> s.energy_eV >> s.eps_re >> s.eps_im)) {
      // tolerate one header row of column names
      if (samples.empty() && line.find_first_not_of(
              "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_ \t\r") ==
              std::string::npos)
        continue;
      throw parse_error("expected 'energy_eV,eps_re,eps_im'", name, lineno);
    }
    samples.push_back(s);
  }
  try {
    return from_samples(std::move(samples));
  } catch (const validation_error& e) {
    throw validation_error(name + ": " + e.what());
  }
}

DielectricTable DielectricTable::load_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw io_error("cannot open dielectric table: " + path);
  return load_csv(in, path);
}

std::complex<double> DielectricTable::permittivity(double energy_eV) const {
  if (energy_eV < min_energy() || energy_eV > max_energy())
    throw domain_error("energy " + std::to_string(energy_eV) +
                           " eV outside dielectric table [" +
                           std::to_string(min_energy()) + ", " +
                           std::to_string(max_energy()) + "]",
                       energy_eV);
  auto it = std::lower_bound(mSamples.begin(), mSamples.end(), energy_eV,
                             [](const DielectricSample& s, double e) {
                               return s.energy_eV < e;
                             });
  if (it == mSamples.begin())
    return {it->eps_re, it->eps_im};
  const DielectricSample& hi = *it;
  const DielectricSample& lo = *(it - 1);
  const double t = (energy_eV - lo.energy_eV) / (hi.energy_eV - lo.energy_eV);
  return {lo.eps_re + t * (hi.eps_re - lo.eps_re),
          lo.eps_im + t * (hi.eps_im - lo.eps_im)};
}

std::complex<double> DielectricTable::refractive_index(double energy_eV) const {
  std::complex<double> n = std::sqrt(permittivity(energy_eV));
  if (n.real() < 0.0)
    n = -n;
  return n;
}

} // namespace coinccl
