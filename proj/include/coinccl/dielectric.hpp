#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace coinccl {

struct DielectricSample {
  double energy_eV;
  double eps_re;
  double eps_im;
};

// Tabulated relative permittivity eps(E), linearly interpolated.
// Invariants enforced on construction: >= 2 samples, energies strictly
// increasing, eps_im >= 0 everywhere.
class DielectricTable {
public:
  static DielectricTable from_samples(std::vector<DielectricSample> samples);

  // CSV columns: energy_eV, eps_re, eps_im; '#' comments and an optional
  // header row are skipped
  static DielectricTable load_csv(std::istream& in, const std::string& name);
  static DielectricTable load_csv_file(const std::string& path);

  /// eps at energy (linear interpolation; domain_error outside the table)
  std::complex<double> permittivity(double energy_eV) const;

  /// principal sqrt(eps) with Re >= 0
  std::complex<double> refractive_index(double energy_eV) const;

  double min_energy() const { return mSamples.front().energy_eV; }
  double max_energy() const { return mSamples.back().energy_eV; }
  const std::vector<DielectricSample>& samples() const { return mSamples; }

private:
  DielectricTable() = default;
  std::vector<DielectricSample> mSamples;
};

} // namespace coinccl
