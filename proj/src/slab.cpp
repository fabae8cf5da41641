#include "coinccl/slab.hpp"

#include <array>
#include <cmath>
#include <string>

#include "coinccl/constants.hpp"
#include "coinccl/errors.hpp"
#include "coinccl/parallel.hpp"

namespace coinccl {

using cd = std::complex<double>;
namespace kc = coinccl::constants;

namespace {

constexpr double kImEpsClamp = 1e-6;
constexpr double kPi = 3.14159265358979323846;

// The moving-charge denominator Q^2 + (w/v)^2 - eps (w/c)^2 has a real-axis
// zero (Cherenkov pole) when eps is real with eps*beta^2 > 1. Only then is
// the imaginary part lifted; a lossless sub-threshold medium, vacuum
// included, must stay untouched so that its loss vanishes identically.
cd clamp_for_denominator(cd eps, double beta) {
  if (eps.imag() < kImEpsClamp && eps.real() * beta * beta > 1.0)
    return {eps.real(), kImEpsClamp};
  return eps;
}

struct SolveInput {
  cd eps;
  double beta;
  double h;  // half thickness
  double k0; // E / (hbar c)
  double w;  // omega / v = k0 / beta
  double q;
};

// Gaussian elimination with partial pivoting on the 4x4 boundary system.
// Returns false when a pivot vanishes (degenerate parameters).
bool solve4(std::array<std::array<cd, 4>, 4>& A, std::array<cd, 4>& b,
            std::array<cd, 4>& x) {
  std::array<int, 4> perm{0, 1, 2, 3};
  for (int col = 0; col < 4; ++col) {
    int best = col;
    double mag = std::abs(A[perm[col]][col]);
    for (int r = col + 1; r < 4; ++r) {
      double m = std::abs(A[perm[r]][col]);
      if (m > mag) {
        mag = m;
        best = r;
      }
    }
    if (mag == 0.0)
      return false;
    std::swap(perm[col], perm[best]);
    const cd piv = A[perm[col]][col];
    for (int r = col + 1; r < 4; ++r) {
      const cd f = A[perm[r]][col] / piv;
      if (f == cd{})
        continue;
      for (int c = col; c < 4; ++c)
        A[perm[r]][c] -= f * A[perm[col]][c];
      b[perm[r]] -= f * b[perm[col]];
    }
  }
  for (int row = 3; row >= 0; --row) {
    cd acc = b[perm[row]];
    for (int c = row + 1; c < 4; ++c)
      acc -= A[perm[row]][c] * x[c];
    x[row] = acc / A[perm[row]][row];
  }
  return true;
}

FieldCoefficients solve_boundaries(const SolveInput& in) {
  FieldCoefficients out{};
  const cd eps = in.eps;
  const double Q = in.q;
  out.alpha = branch_sqrt(cd(Q * Q) - eps * (in.k0 * in.k0));
  out.alpha0 = branch_sqrt(cd(Q * Q - in.k0 * in.k0));

  if (Q == 0.0) {
    // sources of the radial field vanish with Q; all scattered
    // coefficients go to zero in this limit
    out.residual = 0.0;
    return out;
  }

  const cd epsD = clamp_for_denominator(eps, in.beta);
  const cd D = cd(Q * Q + in.w * in.w) - epsD * (in.k0 * in.k0);
  const cd D0 = cd(Q * Q + in.w * in.w - in.k0 * in.k0);
  const double beta2 = in.beta * in.beta;

  const cd i{0.0, 1.0};
  const cd SRv = i * Q / D0;
  const cd SRm = i * Q / (eps * D);
  const cd SZv = i * in.w * (1.0 - beta2) / D0;
  const cd eSZm = i * in.w * (1.0 - eps * beta2) / D; // eps * (medium z-source)

  const cd ea0 = std::exp(-out.alpha0 * in.h);
  const cd eap = std::exp(out.alpha * in.h);
  const cd eam = std::exp(-out.alpha * in.h);
  const cd ph = std::exp(i * (in.w * in.h));
  const cd pmh = std::exp(-i * (in.w * in.h));

  const cd rz0 = i * Q / out.alpha0; // vacuum E_z / E_R coupling
  const cd rzm = i * Q * eps / out.alpha;

  // unknowns x = [B1, A2, B2, A3]; continuity of E_R and of eps*E_z at the
  // two faces z = +-h
  std::array<std::array<cd, 4>, 4> A{{
      {ea0, -eap, -eam, cd{}},
      {rz0 * ea0, rzm * eap, -rzm * eam, cd{}},
      {cd{}, -eam, -eap, ea0},
      {cd{}, rzm * eam, -rzm * eap, -rz0 * ea0},
  }};
  std::array<cd, 4> b{
      (SRm - SRv) * ph,
      (eSZm - SZv) * ph,
      (SRm - SRv) * pmh,
      (eSZm - SZv) * pmh,
  };
  const auto A_saved = A;
  const auto b_saved = b;

  std::array<cd, 4> x{};
  if (!solve4(A, b, x))
    throw numerical_error("singular boundary system", in.k0 * kc::hbar_c_eV_nm, Q);

  out.b1 = x[0];
  out.a2 = x[1];
  out.b2 = x[2];
  out.a3 = x[3];

  double maxrow = 0.0, maxres = 0.0;
  for (int r = 0; r < 4; ++r) {
    cd acc = -b_saved[r];
    double row = 0.0;
    for (int c = 0; c < 4; ++c) {
      acc += A_saved[r][c] * x[c];
      row += std::norm(A_saved[r][c]);
    }
    maxres = std::max(maxres, std::abs(acc));
    maxrow = std::max(maxrow, std::sqrt(row));
  }
  out.residual = maxrow > 0.0 ? maxres / maxrow : maxres;
  return out;
}

SolveInput make_input(cd eps, double beta, double thickness_nm, double energy_eV,
                      double q_per_nm) {
  if (!(thickness_nm > 0.0))
    throw validation_error("film thickness must be positive");
  if (!(energy_eV > 0.0))
    throw validation_error("loss energy must be positive");
  if (q_per_nm < 0.0)
    throw validation_error("transverse wavenumber must be >= 0");
  SolveInput in;
  in.eps = eps;
  in.beta = beta;
  in.h = 0.5 * thickness_nm;
  in.k0 = energy_eV / kc::hbar_c_eV_nm;
  in.w = in.k0 / beta;
  in.q = q_per_nm;
  // Exactly on a light line both one-sided limits of the densities are
  // finite but the raw system is singular (alpha or alpha0 = 0). Decimal
  // default grids do land here bit-exactly, so evaluate a hair above
  // instead of failing the whole map.
  auto degenerate = [&](double q) {
    const double d0 = q * q - in.k0 * in.k0;
    const cd dm = cd(q * q) - eps * (in.k0 * in.k0);
    return d0 == 0.0 || dm == cd{};
  };
  if (in.q > 0.0 && degenerate(in.q)) {
    double q = in.q;
    for (int step = 0; step < 4; ++step)
      q = std::nextafter(q, q * 2.0);
    in.q = q;
  }
  return in;
}

} // namespace

cd branch_sqrt(cd z) {
  cd w = std::sqrt(z);
  if (w.real() < 0.0)
    w = -w;
  if (w.real() == 0.0 && w.imag() > 0.0)
    w = -w;
  return w;
}

BeamKinematics BeamKinematics::from_kinetic_energy(double kinetic_energy_eV) {
  if (!(kinetic_energy_eV > 0.0))
    throw validation_error("beam kinetic energy must be positive");
  BeamKinematics k;
  k.kinetic_energy_eV = kinetic_energy_eV;
  k.gamma = 1.0 + kinetic_energy_eV / kc::electron_mass_eV;
  k.beta = std::sqrt(1.0 - 1.0 / (k.gamma * k.gamma));
  k.wavenumber_per_nm = k.gamma * k.beta * kc::electron_mass_eV / kc::hbar_c_eV_nm;
  return k;
}

std::pair<cd, cd> transverse_wavenumbers(cd eps, double energy_eV, double q_per_nm) {
  const double k0 = energy_eV / kc::hbar_c_eV_nm;
  return {branch_sqrt(cd(q_per_nm * q_per_nm) - eps * (k0 * k0)),
          branch_sqrt(cd(q_per_nm * q_per_nm - k0 * k0))};
}

FieldCoefficients field_coefficients(cd eps, double beta, double thickness_nm,
                                     double energy_eV, double q_per_nm) {
  return solve_boundaries(make_input(eps, beta, thickness_nm, energy_eV, q_per_nm));
}

FieldCoefficients field_coefficients(const SlabConfig& cfg, double energy_eV,
                                     double q_per_nm) {
  return field_coefficients(cfg.dielectric.permittivity(energy_eV), cfg.beam.beta,
                            cfg.thickness_nm, energy_eV, q_per_nm);
}

double bulk_loss_term(cd eps, double beta, double thickness_nm, double energy_eV,
                      double q_per_nm) {
  const double k0 = energy_eV / kc::hbar_c_eV_nm;
  const double w = k0 / beta;
  const cd epsD = clamp_for_denominator(eps, beta);
  const cd D = cd(q_per_nm * q_per_nm + w * w) - epsD * (k0 * k0);
  const double b2 = beta * beta;
  const double hbv = kc::hbar_c_eV_nm * beta;
  return -kc::coulomb_eV_nm * thickness_nm / (kPi * kPi * hbv * hbv) *
         std::imag((1.0 - eps * b2) / (eps * D));
}

double loss_density(cd eps, double beta, double thickness_nm, double energy_eV,
                    double q_per_nm) {
  const SolveInput in = make_input(eps, beta, thickness_nm, energy_eV, q_per_nm);
  if (in.q == 0.0)
    return bulk_loss_term(eps, beta, thickness_nm, energy_eV, 0.0);
  const FieldCoefficients fc = solve_boundaries(in);
  const cd m{0.0, in.w};
  const cd a0 = fc.alpha0, al = fc.alpha;
  const double d = thickness_nm;
  const cd t1 = fc.a3 * std::exp(-in.h * (a0 - m)) / (a0 * (a0 - m));
  const cd t2 = -fc.b1 * std::exp(-in.h * (a0 + m)) / (a0 * (a0 + m));
  const cd t3 = 2.0 * fc.a2 * std::sinh(in.h * (al - m)) / (al * (al - m));
  const cd t4 = -2.0 * fc.b2 * std::sinh(in.h * (al + m)) / (al * (al + m));
  const double boundary = kc::coulomb_eV_nm * in.q /
                          (kPi * kPi * energy_eV * kc::hbar_c_eV_nm * beta) *
                          std::imag(t1 + t2 + t3 + t4);
  return boundary + bulk_loss_term(eps, beta, d, energy_eV, in.q);
}

double loss_density(const SlabConfig& cfg, double energy_eV, double q_per_nm) {
  return loss_density(cfg.dielectric.permittivity(energy_eV), cfg.beam.beta,
                      cfg.thickness_nm, energy_eV, q_per_nm);
}

double tr_density(cd eps, double beta, double thickness_nm, double energy_eV,
                  double q_per_nm) {
  const double k0 = energy_eV / kc::hbar_c_eV_nm;
  if (q_per_nm >= k0)
    return 0.0; // no propagating photon past the light line
  const double qz = std::sqrt(k0 * k0 - q_per_nm * q_per_nm);
  const FieldCoefficients fc =
      field_coefficients(eps, beta, thickness_nm, energy_eV, q_per_nm);
  const double hbv = kc::hbar_c_eV_nm * beta;
  return kc::coulomb_eV_nm * std::norm(fc.b1) / (kPi * kPi * hbv * hbv * qz);
}

double tr_density(const SlabConfig& cfg, double energy_eV, double q_per_nm) {
  return tr_density(cfg.dielectric.permittivity(energy_eV), cfg.beam.beta,
                    cfg.thickness_nm, energy_eV, q_per_nm);
}

double tr_angular_density(const SlabConfig& cfg, double energy_eV, double theta) {
  if (theta < 0.0 || theta > 0.5 * kPi)
    throw validation_error("photon polar angle must lie in [0, pi/2]");
  const double k0 = energy_eV / kc::hbar_c_eV_nm;
  return 2.0 * kPi * k0 * k0 * std::cos(theta) *
         tr_density(cfg, energy_eV, k0 * std::sin(theta));
}

double gamma_tr(const SlabConfig& cfg, double energy_eV,
                const std::function<bool(double, double)>& mask) {
  const double k0 = energy_eV / kc::hbar_c_eV_nm;
  const cd eps = cfg.dielectric.permittivity(energy_eV);
  const double beta = cfg.beam.beta;

  // azimuthal measure of the mask at polar angle theta
  constexpr int kPhiSamples = 512;
  auto phi_measure = [&](double theta) {
    if (!mask)
      return 2.0 * kPi;
    int inside = 0;
    for (int s = 0; s < kPhiSamples; ++s) {
      const double phi = (s + 0.5) * (2.0 * kPi / kPhiSamples);
      if (mask(theta, phi))
        ++inside;
    }
    return 2.0 * kPi * inside / kPhiSamples;
  };

  auto integrand = [&](double theta) {
    const double m = phi_measure(theta);
    if (m == 0.0)
      return 0.0;
    const FieldCoefficients fc = field_coefficients(
        eps, beta, cfg.thickness_nm, energy_eV, k0 * std::sin(theta));
    return std::sin(theta) * std::norm(fc.b1) * m;
  };

  QuadratureOptions opt;
  opt.rel_tol = 1e-7;
  const double integral = integrate_or_throw(
      integrand, 0.0, 0.5 * kPi, opt, "photon-rate quadrature did not converge");
  const double hbv = kc::hbar_c_eV_nm * beta;
  return kc::coulomb_eV_nm * k0 / (kPi * kPi * hbv * hbv) * integral;
}

QuadratureResult gamma_loss(const SlabConfig& cfg, double energy_eV, double q_max) {
  const double k0 = energy_eV / kc::hbar_c_eV_nm;
  const cd eps = cfg.dielectric.permittivity(energy_eV);
  QuadratureOptions opt;
  if (k0 < q_max)
    opt.split_points = {k0};
  return integrate(
      [&](double q) {
        return 2.0 * kPi * q *
               loss_density(eps, cfg.beam.beta, cfg.thickness_nm, energy_eV, q);
      },
      0.0, q_max, opt);
}

double ridge_argmax_q(const SlabConfig& cfg, double energy_eV, double q_max,
                      std::size_t points) {
  const cd eps = cfg.dielectric.permittivity(energy_eV);
  std::vector<double> qs = linspace(0.0, q_max, points);
  std::vector<double> vals(points);
  parallel_for(points, [&](std::size_t i) {
    vals[i] = loss_density(eps, cfg.beam.beta, cfg.thickness_nm, energy_eV, qs[i]);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < points; ++i)
    if (vals[i] > vals[best])
      best = i;
  return qs[best];
}

std::vector<double> default_energy_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 450; ++i)
    g.push_back(0.5 + i * 0.01);
  return g;
}

std::vector<double> default_q_grid() {
  const double qmax = 3.0 * (5.0 / kc::hbar_c_eV_nm);
  return linspace(0.0, qmax, 601);
}

namespace {

// separable Gaussian blur along one index, 4-sigma kernel, renormalized
// where the kernel is cut by the matrix edge
void blur_axis(Matrix& m, double fwhm, double step, bool along_columns) {
  if (fwhm <= 0.0 || step <= 0.0)
    return;
  const double sigma = fwhm / 2.3548200450309493;
  const int radius = static_cast<int>(std::ceil(4.0 * sigma / step));
  if (radius < 1)
    return;
  std::vector<double> w(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k)
    w[k + radius] = std::exp(-0.5 * (k * step / sigma) * (k * step / sigma));
  const long rows = static_cast<long>(m.rows());
  const long cols = static_cast<long>(m.cols());
  Matrix out(m.rows(), m.cols());
  parallel_for(m.rows(), [&](std::size_t r) {
    for (long c = 0; c < cols; ++c) {
      double acc = 0.0, norm = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const long j = (along_columns ? c : static_cast<long>(r)) + k;
        if (j < 0 || j >= (along_columns ? cols : rows))
          continue;
        const double wk = w[k + radius];
        acc += wk * (along_columns ? m(r, static_cast<std::size_t>(j))
                                   : m(static_cast<std::size_t>(j),
                                       static_cast<std::size_t>(c)));
        norm += wk;
      }
      out(r, static_cast<std::size_t>(c)) = acc / norm;
    }
  });
  m = std::move(out);
}

} // namespace

LossMap loss_map(const SlabConfig& cfg, const std::vector<double>& energy_grid,
                 const std::vector<double>& q_grid,
                 const std::optional<MapResolution>& resolution) {
  if (energy_grid.empty() || q_grid.empty())
    throw validation_error("loss map grids must be non-empty");
  if (energy_grid.front() < cfg.dielectric.min_energy() ||
      energy_grid.back() > cfg.dielectric.max_energy())
    throw domain_error("energy grid exceeds dielectric table range",
                       energy_grid.front());

  LossMap map;
  map.energy_axis = energy_grid;
  map.qperp_axis = q_grid;
  map.rho = Matrix(energy_grid.size(), q_grid.size());
  map.rho_tr = Matrix(energy_grid.size(), q_grid.size());

  parallel_for(energy_grid.size(), [&](std::size_t i) {
    const double E = energy_grid[i];
    const cd eps = cfg.dielectric.permittivity(E);
    for (std::size_t j = 0; j < q_grid.size(); ++j) {
      map.rho(i, j) =
          loss_density(eps, cfg.beam.beta, cfg.thickness_nm, E, q_grid[j]);
      map.rho_tr(i, j) =
          tr_density(eps, cfg.beam.beta, cfg.thickness_nm, E, q_grid[j]);
    }
  });

  if (resolution) {
    const double estep =
        energy_grid.size() > 1 ? energy_grid[1] - energy_grid[0] : 1.0;
    const double qstep = q_grid.size() > 1 ? q_grid[1] - q_grid[0] : 1.0;
    blur_axis(map.rho, resolution->energy_fwhm_eV, estep, false);
    blur_axis(map.rho, resolution->q_fwhm_per_nm, qstep, true);
    blur_axis(map.rho_tr, resolution->energy_fwhm_eV, estep, false);
    blur_axis(map.rho_tr, resolution->q_fwhm_per_nm, qstep, true);
  }
  return map;
}

} // namespace coinccl
