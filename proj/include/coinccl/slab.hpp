#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "coinccl/dielectric.hpp"
#include "coinccl/grid.hpp"
#include "coinccl/quadrature.hpp"

namespace coinccl {

struct BeamKinematics {
  double kinetic_energy_eV = 0.0;
  double gamma = 1.0;
  double beta = 0.0;
  double wavenumber_per_nm = 0.0; // longitudinal electron wavenumber

  static BeamKinematics from_kinetic_energy(double kinetic_energy_eV);
};

// film of thickness d crossed by the beam at normal incidence
struct SlabConfig {
  double thickness_nm = 100.0;
  DielectricTable dielectric;
  BeamKinematics beam;
};

// Fourier field coefficients of the scattered solution at transverse
// wavenumber Q (units: nm; field scale e/(v eps0) divided out).
// b1: vacuum side the electron exits last (z > d/2, decaying/outgoing)
// a2, b2: inside the film; a3: vacuum z < -d/2
struct FieldCoefficients {
  std::complex<double> b1, a2, b2, a3;
  std::complex<double> alpha;  // in-film transverse decay constant
  std::complex<double> alpha0; // vacuum decay constant
  double residual = 0.0;       // boundary-equation residual, relative
};

/// sqrt with Re >= 0, ties broken to Im <= 0 (outgoing-wave convention)
std::complex<double> branch_sqrt(std::complex<double> z);

/// (alpha, alpha0) for permittivity eps at (energy, Q)
std::pair<std::complex<double>, std::complex<double>>
transverse_wavenumbers(std::complex<double> eps, double energy_eV, double q_per_nm);

FieldCoefficients field_coefficients(std::complex<double> eps, double beta,
                                     double thickness_nm, double energy_eV,
                                     double q_per_nm);
FieldCoefficients field_coefficients(const SlabConfig& cfg, double energy_eV,
                                     double q_per_nm);

/// volume (begrenzung-free) part of the loss density, eV^-1 nm^2
double bulk_loss_term(std::complex<double> eps, double beta, double thickness_nm,
                      double energy_eV, double q_per_nm);

/// energy-loss probability density over (E, 2*pi*Q dQ), eV^-1 nm^2
double loss_density(std::complex<double> eps, double beta, double thickness_nm,
                    double energy_eV, double q_per_nm);
double loss_density(const SlabConfig& cfg, double energy_eV, double q_per_nm);

/// radiative (escaping-photon) part; exactly 0 for Q >= E/(hbar c)
double tr_density(std::complex<double> eps, double beta, double thickness_nm,
                  double energy_eV, double q_per_nm);
double tr_density(const SlabConfig& cfg, double energy_eV, double q_per_nm);

/// same density over photon polar angle: 2*pi*k^2*cos(theta)*tr_density,
/// normalized so that integral sin(theta) dtheta recovers the Q integral
double tr_angular_density(const SlabConfig& cfg, double energy_eV, double theta);

/// photon emission rate density (eV^-1) into the solid-angle mask;
/// mask == nullptr means the full forward hemisphere
double gamma_tr(const SlabConfig& cfg, double energy_eV,
                const std::function<bool(double theta, double phi)>& mask = nullptr);

/// total loss integral 2*pi*Q*rho over [0, q_max]
QuadratureResult gamma_loss(const SlabConfig& cfg, double energy_eV, double q_max);

/// argmax_Q of the loss density over a dense scan of [0, q_max]
double ridge_argmax_q(const SlabConfig& cfg, double energy_eV, double q_max,
                      std::size_t points = 24001);

struct MapResolution {
  double energy_fwhm_eV = 0.0; // <= 0 disables
  double q_fwhm_per_nm = 0.0;
};

struct LossMap {
  std::vector<double> energy_axis; // rows
  std::vector<double> qperp_axis;  // columns
  Matrix rho;
  Matrix rho_tr;
};

std::vector<double> default_energy_grid(); // 0.5..5.0 eV, step 0.01
std::vector<double> default_q_grid();      // 0..3*(5 eV/hbar c), 601 points

/// evaluate both densities on the grid, optionally blurred by a separable
/// Gaussian (kernel truncated at 4 sigma, renormalized at the edges)
LossMap loss_map(const SlabConfig& cfg, const std::vector<double>& energy_grid,
                 const std::vector<double>& q_grid,
                 const std::optional<MapResolution>& resolution = std::nullopt);

} // namespace coinccl
