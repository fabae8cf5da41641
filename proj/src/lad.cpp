#include "coinccl/lad.hpp"

#include <algorithm>
#include <cmath>

#include "coinccl/constants.hpp"
#include "coinccl/errors.hpp"
#include "coinccl/parallel.hpp"
#include "coinccl/quadrature.hpp"

namespace coinccl {

namespace kc = constants;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr int kRingSamples = 720;

struct EnergyWindow {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(lo < hi); }
};

EnergyWindow integration_window(const SlabConfig& cfg,
                                const EfficiencyCurves& curves,
                                const ElectronEnergyFilter& efilter,
                                const PhotonBandpass& bandpass,
                                bool coincidence) {
  EnergyWindow w{cfg.dielectric.min_energy(), cfg.dielectric.max_energy()};
  if (coincidence) {
    w.lo = std::max({w.lo, curves.fiber.min_energy(),
                     curves.detector.min_energy()});
    w.hi = std::min({w.hi, curves.fiber.max_energy(),
                     curves.detector.max_energy()});
    if (bandpass.enabled) {
      const double lam_hi = bandpass.center_nm + 0.5 * bandpass.fwhm_nm;
      const double lam_lo = bandpass.center_nm - 0.5 * bandpass.fwhm_nm;
      w.lo = std::max(w.lo, kc::photon_eV_nm / lam_hi);
      if (lam_lo > 0.0)
        w.hi = std::min(w.hi, kc::photon_eV_nm / lam_lo);
    }
  }
  if (efilter.enabled) {
    w.lo = std::max(w.lo, efilter.center_eV - efilter.halfwidth_eV);
    w.hi = std::min(w.hi, efilter.center_eV + efilter.halfwidth_eV);
  }
  return w;
}

// energies at which the integrand at fixed Q kinks: the light line and,
// for a parametric mirror, the polar acceptance edges of the reflected
// photon direction
std::vector<double> pixel_split_points(const MirrorModel& mirror,
                                       double q_per_nm, bool coincidence) {
  std::vector<double> splits;
  if (q_per_nm <= 0.0)
    return splits;
  splits.push_back(q_per_nm * kc::hbar_c_eV_nm);
  if (coincidence && mirror.variant == MirrorVariant::parametric) {
    const double s_min = std::sin(mirror.theta_min_rad);
    const double s_max = std::sin(mirror.theta_max_rad);
    if (s_min > 0.0)
      splits.push_back(q_per_nm * kc::hbar_c_eV_nm / s_min);
    if (s_max > 0.0)
      splits.push_back(q_per_nm * kc::hbar_c_eV_nm / s_max);
  }
  return splits;
}

}  // namespace

double coincidence_density(const SlabConfig& cfg, const MirrorModel& mirror,
                           const EfficiencyCurves& curves,
                           const ElectronEnergyFilter& efilter,
                           const PhotonBandpass& bandpass, double energy_eV,
                           double qx_per_nm, double qy_per_nm) {
  if (energy_eV <= 0.0)
    return 0.0;
  const double q = std::hypot(qx_per_nm, qy_per_nm);
  const double k0 = energy_eV / kc::hbar_c_eV_nm;
  if (q >= k0)
    return 0.0;
  if (energy_eV < cfg.dielectric.min_energy() ||
      energy_eV > cfg.dielectric.max_energy())
    return 0.0;
  if (energy_eV < curves.fiber.min_energy() ||
      energy_eV > curves.fiber.max_energy() ||
      energy_eV < curves.detector.min_energy() ||
      energy_eV > curves.detector.max_energy())
    return 0.0;
  const double alpha = electron_filter_weight(efilter, energy_eV);
  if (alpha == 0.0)
    return 0.0;
  const double band = bandpass_weight(bandpass, energy_eV);
  if (band == 0.0)
    return 0.0;
  // momentum conservation: the photon flies opposite the electron recoil.
  // q < k0 keeps the direction inside the unit disk up to rounding; pull the
  // boundary case back onto the rim so the acceptance lookup stays in domain.
  const double scale = kc::hbar_c_eV_nm / energy_eV;
  double khat_x = -qx_per_nm * scale;
  double khat_y = -qy_per_nm * scale;
  const double khat_r = std::hypot(khat_x, khat_y);
  if (khat_r > 1.0) {
    const double shrink = (1.0 - 1e-12) / khat_r;
    khat_x *= shrink;
    khat_y *= shrink;
  }
  const double acc = mirror_acceptance(mirror, khat_x, khat_y);
  if (acc == 0.0)
    return 0.0;
  const double rho = tr_density(cfg, energy_eV, q);
  if (rho == 0.0)
    return 0.0;
  return rho * alpha * band * acc * curves.fiber(energy_eV) *
         curves.detector(energy_eV);
}

LADImage lad_image(LadMode mode, const SlabConfig& cfg,
                   const MirrorModel& mirror, const EfficiencyCurves& curves,
                   const ElectronEnergyFilter& efilter,
                   const PhotonBandpass& bandpass, const ImageSpec& spec,
                   const ZeroLossSpot& zero_loss) {
  if (spec.pixels < 2)
    throw validation_error("image needs at least 2x2 pixels");
  if (spec.half_span_urad <= 0.0)
    throw validation_error("image half span must be positive");

  const bool coincidence = mode == LadMode::coincidence;
  const EnergyWindow window =
      integration_window(cfg, curves, efilter, bandpass, coincidence);

  LADImage img;
  const std::size_t n = spec.pixels;
  img.counts = Matrix(n, n);
  img.pitch_urad = 2.0 * spec.half_span_urad / static_cast<double>(n);
  img.center_px = (static_cast<double>(n) - 1.0) / 2.0;
  img.beam_wavenumber_per_nm = cfg.beam.wavenumber_per_nm;

  parallel_for(n, [&](std::size_t row) {
    const double theta_y = img.theta_y_urad(row);
    for (std::size_t col = 0; col < n; ++col) {
      const double theta_x = img.theta_x_urad(col);
      double value = 0.0;
      if (!window.empty()) {
        const double qx = theta_x * 1e-6 * cfg.beam.wavenumber_per_nm;
        const double qy = theta_y * 1e-6 * cfg.beam.wavenumber_per_nm;
        const double q = std::hypot(qx, qy);
        QuadratureOptions opt;
        opt.rel_tol = 1e-6;
        opt.split_points = pixel_split_points(mirror, q, coincidence);
        if (coincidence) {
          value = integrate(
                      [&](double e) {
                        return coincidence_density(cfg, mirror, curves,
                                                   efilter, bandpass, e, qx,
                                                   qy);
                      },
                      window.lo, window.hi, opt)
                      .value;
        } else {
          value = integrate(
                      [&](double e) { return loss_density(cfg, e, q); },
                      window.lo, window.hi, opt)
                      .value;
        }
      }
      if (!coincidence && zero_loss.enabled && zero_loss.sigma_urad > 0.0) {
        const double r2 = theta_x * theta_x + theta_y * theta_y;
        value += zero_loss.amplitude *
                 std::exp(-0.5 * r2 /
                          (zero_loss.sigma_urad * zero_loss.sigma_urad));
      }
      img.counts(row, col) = value;
    }
  });
  return img;
}

namespace {

double bilinear(const Matrix& m, double x, double y) {
  const std::size_t cols = m.cols();
  const std::size_t rows = m.rows();
  double fx = std::floor(x);
  double fy = std::floor(y);
  std::size_t i0 = static_cast<std::size_t>(
      std::clamp<double>(fx, 0.0, static_cast<double>(cols - 2)));
  std::size_t j0 = static_cast<std::size_t>(
      std::clamp<double>(fy, 0.0, static_cast<double>(rows - 2)));
  const double tx = x - static_cast<double>(i0);
  const double ty = y - static_cast<double>(j0);
  const double v00 = m(j0, i0);
  const double v01 = m(j0, i0 + 1);
  const double v10 = m(j0 + 1, i0);
  const double v11 = m(j0 + 1, i0 + 1);
  return (1.0 - ty) * ((1.0 - tx) * v00 + tx * v01) +
         ty * ((1.0 - tx) * v10 + tx * v11);
}

}  // namespace

RadialProfile radial_profile(const LADImage& image) {
  const std::size_t n = image.counts.rows();
  if (n < 2 || image.counts.cols() != n)
    throw validation_error("radial profile needs a square image");
  const double c = image.center_px;
  if (c < 0.0 || c > static_cast<double>(n - 1))
    throw validation_error("image center outside the image");
  const double max_r =
      std::min(c, static_cast<double>(n - 1) - c);
  const std::size_t bins = static_cast<std::size_t>(std::floor(max_r)) + 1;

  RadialProfile profile;
  profile.theta_urad.resize(bins);
  profile.qperp_per_nm.resize(bins);
  profile.intensity.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const double theta = static_cast<double>(k) * image.pitch_urad;
    profile.theta_urad[k] = theta;
    profile.qperp_per_nm[k] = theta * 1e-6 * image.beam_wavenumber_per_nm;
    if (k == 0) {
      profile.intensity[0] = 0.0;
      continue;
    }
    const double r = static_cast<double>(k);
    double ring = 0.0;
    for (int s = 0; s < kRingSamples; ++s) {
      const double phi = 2.0 * kPi * static_cast<double>(s) /
                         static_cast<double>(kRingSamples);
      ring += bilinear(image.counts, c + r * std::cos(phi),
                       c + r * std::sin(phi));
    }
    profile.intensity[k] = theta * ring;
  }
  return profile;
}

PeakEstimate most_probable_deflection(const RadialProfile& profile) {
  const std::size_t n = profile.intensity.size();
  if (n == 0)
    throw validation_error("empty radial profile");
  std::size_t best = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (profile.intensity[k] > profile.intensity[best])
      best = k;
  if (profile.intensity[best] <= 0.0)
    throw validation_error("radial profile has no signal");

  const double pitch =
      n > 1 ? profile.theta_urad[1] - profile.theta_urad[0] : 0.0;
  PeakEstimate est;
  est.theta_urad = profile.theta_urad[best];
  est.uncertainty_urad = 0.5 * pitch;
  if (best > 0 && best + 1 < n) {
    const double ym = profile.intensity[best - 1];
    const double y0 = profile.intensity[best];
    const double yp = profile.intensity[best + 1];
    const double denom = ym - 2.0 * y0 + yp;
    if (denom < 0.0) {
      double delta = 0.5 * (ym - yp) / denom;
      delta = std::clamp(delta, -0.5, 0.5);
      est.theta_urad += delta * pitch;
    }
  }
  return est;
}

}  // namespace coinccl
