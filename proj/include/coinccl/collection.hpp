#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "coinccl/grid.hpp"

namespace coinccl {

// Piecewise-linear efficiency curve over photon energy. Values must lie in
// [0,1]; evaluation outside the tabulated range is a domain error.
class EfficiencyCurve {
 public:
  static EfficiencyCurve from_samples(std::vector<double> energy_eV,
                                      std::vector<double> value);
  // CSV rows "energy_eV,value"; '#' comments and one alphabetic header row
  // are skipped.
  static EfficiencyCurve load_csv(const std::string& text,
                                  const std::string& name = "<csv>");
  static EfficiencyCurve load_csv_file(const std::string& path);

  double operator()(double energy_eV) const;
  double min_energy() const { return energy_.front(); }
  double max_energy() const { return energy_.back(); }
  std::size_t size() const { return energy_.size(); }

 private:
  std::vector<double> energy_;
  std::vector<double> value_;
};

struct EfficiencyCurves {
  EfficiencyCurve fiber;
  EfficiencyCurve detector;
};

enum class MirrorVariant { parametric, tabulated };

// Acceptance map over the photon transverse direction
// khat_perp = (sin(theta)cos(phi), sin(theta)sin(phi)).
//
// parametric: accepts theta in [theta_min, theta_max], rejects azimuths
// within gap_halfwidth of gap_center (boundary inclusive; a negative
// halfwidth disables the gap) and points inside any shading polygon given
// as (theta, phi) vertices with phi in (-pi, pi]. Polygons must not wrap
// across the +-pi seam.
//
// tabulated: bilinear interpolation on a rectangular (khat_x, khat_y) grid,
// output clamped to [0,1]; queries outside the grid bounding box return 0.
struct MirrorModel {
  MirrorVariant variant = MirrorVariant::parametric;

  double theta_min_rad = 0.35;
  double theta_max_rad = 1.25;
  double gap_center_rad = 0.0;
  double gap_halfwidth_rad = 0.5;
  std::vector<std::vector<std::array<double, 2>>> shading_polygons;

  std::vector<double> grid_x;  // strictly increasing
  std::vector<double> grid_y;
  Matrix values;  // rows follow grid_y, cols follow grid_x

  static MirrorModel horseshoe();
  static MirrorModel full_disk();
  // CSV rows "khat_x,khat_y,value" covering a full rectangular grid.
  static MirrorModel tabulated_from_csv(const std::string& text,
                                        const std::string& name = "<csv>");
  static MirrorModel tabulated_from_csv_file(const std::string& path);
};

// Acceptance in [0,1] for |khat| <= 1; |khat| > 1 is a domain error.
double mirror_acceptance(const MirrorModel& model, double khat_x,
                         double khat_y);

// Product A * fiber * detector at the given photon energy and direction.
double photon_efficiency(const MirrorModel& model,
                         const EfficiencyCurves& curves, double energy_eV,
                         double khat_x, double khat_y);

struct ElectronEnergyFilter {
  double center_eV = 3.0;
  double halfwidth_eV = 0.5;
  bool enabled = false;
};

// 1 when |E - center| <= halfwidth (boundary inclusive) or the filter is
// disabled, else 0.
double electron_filter_weight(const ElectronEnergyFilter& filter,
                              double energy_eV);

struct PhotonBandpass {
  double center_nm = 550.0;
  double fwhm_nm = 40.0;
  bool enabled = false;
};

// 1 when the photon wavelength 2*pi*hbar*c/E lies within fwhm/2 of the
// center (boundary inclusive) or the filter is disabled, else 0.
// energy_eV <= 0 is a domain error.
double bandpass_weight(const PhotonBandpass& bandpass, double energy_eV);

}  // namespace coinccl
