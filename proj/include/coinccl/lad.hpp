#pragma once

#include <cstddef>
#include <vector>

#include "coinccl/collection.hpp"
#include "coinccl/grid.hpp"
#include "coinccl/slab.hpp"

namespace coinccl {

// Detector-plane image over the electron deflection angle theta_e = pperp/pz.
// counts(row, col) covers pixel centers theta_y(row), theta_x(col) with
// theta(i) = (i - center_px) * pitch_urad; the axis is symmetric about the
// (fractional) center pixel.
struct LADImage {
  Matrix counts;
  double pitch_urad = 0.0;
  double center_px = 0.0;  // same for both axes, grid is square
  double beam_wavenumber_per_nm = 0.0;

  double theta_x_urad(std::size_t col) const {
    return (static_cast<double>(col) - center_px) * pitch_urad;
  }
  double theta_y_urad(std::size_t row) const {
    return (static_cast<double>(row) - center_px) * pitch_urad;
  }
};

// Azimuthally integrated intensity I(pperp) = pperp * sum of ring samples;
// intensity[0] corresponds to radius zero and is identically 0.
struct RadialProfile {
  std::vector<double> theta_urad;
  std::vector<double> qperp_per_nm;
  std::vector<double> intensity;
};

struct ImageSpec {
  std::size_t pixels = 256;
  double half_span_urad = 15.0;
};

// Optional central Gaussian emulating the unscattered-beam tail; only ever
// added to plain-mode images.
struct ZeroLossSpot {
  bool enabled = false;
  double amplitude = 0.0;
  double sigma_urad = 0.8;
};

enum class LadMode { plain, coincidence };

// Detection-weighted radiative density at one (E, pperp) point:
// tr_density * electron filter * fiber * detector * mirror acceptance at the
// point-reflected photon direction khat = -(qx,qy)*hbar*c/E. Returns 0 for
// momenta outside the light line and for energies outside any table range.
double coincidence_density(const SlabConfig& cfg, const MirrorModel& mirror,
                           const EfficiencyCurves& curves,
                           const ElectronEnergyFilter& efilter,
                           const PhotonBandpass& bandpass, double energy_eV,
                           double qx_per_nm, double qy_per_nm);

// Per-pixel energy integral of loss_density * filter (plain) or of
// coincidence_density (coincidence). The photon bandpass only affects
// coincidence mode.
LADImage lad_image(LadMode mode, const SlabConfig& cfg,
                   const MirrorModel& mirror, const EfficiencyCurves& curves,
                   const ElectronEnergyFilter& efilter,
                   const PhotonBandpass& bandpass, const ImageSpec& spec,
                   const ZeroLossSpot& zero_loss = {});

// Ring integration with 720 bilinear samples per radius; bin width equals
// the pixel pitch.
RadialProfile radial_profile(const LADImage& image);

struct PeakEstimate {
  double theta_urad = 0.0;
  double uncertainty_urad = 0.0;  // half of one profile bin
};

// Argmax of the profile with 3-point parabolic refinement; an all-zero
// profile is a validation error.
PeakEstimate most_probable_deflection(const RadialProfile& profile);

}  // namespace coinccl
