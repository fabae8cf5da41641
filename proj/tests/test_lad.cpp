#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "coinccl/constants.hpp"
#include "coinccl/errors.hpp"
#include "coinccl/lad.hpp"

using coinccl::DielectricTable;
using coinccl::EfficiencyCurve;
using coinccl::EfficiencyCurves;
using coinccl::ElectronEnergyFilter;
using coinccl::ImageSpec;
using coinccl::LADImage;
using coinccl::LadMode;
using coinccl::MirrorModel;
using coinccl::PhotonBandpass;
using coinccl::RadialProfile;
using coinccl::SlabConfig;
using coinccl::ZeroLossSpot;
namespace kc = coinccl::constants;

namespace {

constexpr double kPi = 3.14159265358979323846;
const std::string kDataDir = std::string(COINCCL_REPO_DIR) + "/data";

SlabConfig silicon_slab() {
  return SlabConfig{100.0,
                    DielectricTable::load_csv_file(kDataDir + "/silicon_eps.csv"),
                    coinccl::BeamKinematics::from_kinetic_energy(200000.0)};
}

EfficiencyCurves wide_unit_curves() {
  return {EfficiencyCurve::from_samples({0.4, 5.5}, {1.0, 1.0}),
          EfficiencyCurve::from_samples({0.4, 5.5}, {1.0, 1.0})};
}

EfficiencyCurves bundled_curves() {
  return {EfficiencyCurve::load_csv_file(kDataDir + "/fiber_transmission.csv"),
          EfficiencyCurve::load_csv_file(kDataDir + "/detector_qe.csv")};
}

double light_line_theta_urad(double energy_eV, const SlabConfig& cfg) {
  return energy_eV / (kc::hbar_c_eV_nm * cfg.beam.wavenumber_per_nm) * 1e6;
}

}  // namespace

TEST_CASE("coincidence density is the plain product of its factors") {
  const SlabConfig cfg = silicon_slab();
  const MirrorModel mirror = MirrorModel::horseshoe();
  const EfficiencyCurves curves = bundled_curves();
  const ElectronEnergyFilter no_filter;
  const PhotonBandpass no_bandpass;

  const double E = 2.5;
  const double k0 = E / kc::hbar_c_eV_nm;
  const double q = 0.5 * k0;  // photon polar angle asin(0.5), on the mirror

  // electron recoil along +x puts the photon at azimuth pi, opposite the gap
  const double v = coinccl::coincidence_density(cfg, mirror, curves, no_filter,
                                                no_bandpass, E, q, 0.0);
  const double expect =
      coinccl::tr_density(cfg, E, q) * curves.fiber(E) * curves.detector(E);
  CHECK(v == doctest::Approx(expect).epsilon(1e-14));
  CHECK(v > 0.0);
}

TEST_CASE("coincidence density nulls") {
  const SlabConfig cfg = silicon_slab();
  const MirrorModel mirror = MirrorModel::horseshoe();
  const EfficiencyCurves curves = bundled_curves();
  ElectronEnergyFilter efilter;
  const PhotonBandpass no_bandpass;

  const double E = 2.5;
  const double k0 = E / kc::hbar_c_eV_nm;

  SUBCASE("electron recoil along -x reflects into the mirror gap") {
    CHECK(coinccl::coincidence_density(cfg, mirror, curves, efilter,
                                       no_bandpass, E, -0.5 * k0, 0.0) == 0.0);
  }
  SUBCASE("energy outside the electron filter") {
    efilter.center_eV = 3.0;
    efilter.halfwidth_eV = 0.1;
    efilter.enabled = true;
    CHECK(coinccl::coincidence_density(cfg, mirror, curves, efilter,
                                       no_bandpass, E, 0.5 * k0, 0.0) == 0.0);
  }
  SUBCASE("momenta outside the light line") {
    CHECK(coinccl::coincidence_density(cfg, mirror, curves, efilter,
                                       no_bandpass, E, k0, 0.0) == 0.0);
    CHECK(coinccl::coincidence_density(cfg, mirror, curves, efilter,
                                       no_bandpass, E, 1.2 * k0, 0.4 * k0) == 0.0);
  }
  SUBCASE("wavelength outside the bandpass") {
    PhotonBandpass bp;
    bp.center_nm = 650.0;
    bp.fwhm_nm = 40.0;
    bp.enabled = true;
    CHECK(coinccl::coincidence_density(cfg, mirror, curves, efilter, bp, E,
                                       0.5 * k0, 0.0) == 0.0);
  }
  SUBCASE("energies outside the dielectric or efficiency tables") {
    CHECK(coinccl::coincidence_density(cfg, mirror, curves, efilter,
                                       no_bandpass, 0.45, 1e-4, 0.0) == 0.0);
    CHECK(coinccl::coincidence_density(cfg, mirror, curves, efilter,
                                       no_bandpass, 1.0, 1e-4, 0.0) == 0.0);
  }
}

TEST_CASE("full-disk coincidence image is rotationally symmetric") {
  const SlabConfig cfg = silicon_slab();
  const MirrorModel mirror = MirrorModel::full_disk();
  const EfficiencyCurves curves = wide_unit_curves();
  const ElectronEnergyFilter no_filter;
  PhotonBandpass bp;
  bp.center_nm = 550.0;
  bp.fwhm_nm = 40.0;
  bp.enabled = true;

  ImageSpec spec;
  spec.pixels = 48;
  spec.half_span_urad = 8.0;
  const LADImage img = coinccl::lad_image(LadMode::coincidence, cfg, mirror,
                                          curves, no_filter, bp, spec);
  const std::size_t n = spec.pixels;
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      // quarter-turn rotation maps pixel centers onto pixel centers
      CHECK(img.counts(r, c) == img.counts(c, n - 1 - r));
      total += img.counts(r, c);
    }
  CHECK(total > 0.0);
}

TEST_CASE("horseshoe coincidence image blanks the gap-reflected azimuths") {
  const SlabConfig cfg = silicon_slab();
  const MirrorModel mirror = MirrorModel::horseshoe();
  const EfficiencyCurves curves = bundled_curves();
  const ElectronEnergyFilter no_filter;
  PhotonBandpass bp;
  bp.center_nm = 550.0;
  bp.fwhm_nm = 40.0;
  bp.enabled = true;

  ImageSpec spec;
  spec.pixels = 48;
  spec.half_span_urad = 8.0;
  const LADImage img = coinccl::lad_image(LadMode::coincidence, cfg, mirror,
                                          curves, no_filter, bp, spec);

  // the photon gap sits at azimuth 0 +- 0.5, so electrons vanish at pi +- 0.5
  double gap_sum = 0.0, lit_sum = 0.0;
  const std::size_t n = spec.pixels;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double tx = img.theta_x_urad(c);
      const double ty = img.theta_y_urad(r);
      const double radius = std::hypot(tx, ty);
      if (radius < 1.0 || radius > 7.5)
        continue;
      const double phi = std::atan2(ty, tx);
      double dphi = std::abs(phi - kPi);
      dphi = std::min(dphi, 2.0 * kPi - dphi);
      if (dphi <= 0.45)
        gap_sum += img.counts(r, c);
      else if (dphi >= 0.55)
        lit_sum += img.counts(r, c);
    }
  }
  CHECK(gap_sum == 0.0);
  CHECK(lit_sum > 0.0);
}

TEST_CASE("coincidence mode never adds the central spot") {
  const SlabConfig cfg = silicon_slab();
  const MirrorModel mirror = MirrorModel::horseshoe();
  const EfficiencyCurves curves = bundled_curves();
  ElectronEnergyFilter efilter;
  efilter.center_eV = 2.5;
  efilter.halfwidth_eV = 0.2;
  efilter.enabled = true;
  const PhotonBandpass no_bandpass;

  ImageSpec spec;
  spec.pixels = 16;
  spec.half_span_urad = 8.0;
  ZeroLossSpot spot;
  spot.enabled = true;
  spot.amplitude = 1e6;
  spot.sigma_urad = 0.8;

  const LADImage with_spot = coinccl::lad_image(
      LadMode::coincidence, cfg, mirror, curves, efilter, no_bandpass, spec, spot);
  const LADImage without = coinccl::lad_image(
      LadMode::coincidence, cfg, mirror, curves, efilter, no_bandpass, spec);
  CHECK(with_spot.counts == without.counts);
}

TEST_CASE("plain mode adds the configured central spot") {
  const SlabConfig cfg = silicon_slab();
  const MirrorModel mirror = MirrorModel::horseshoe();
  const EfficiencyCurves curves = bundled_curves();
  ElectronEnergyFilter efilter;
  efilter.center_eV = 3.0;
  efilter.halfwidth_eV = 0.25;
  efilter.enabled = true;
  const PhotonBandpass no_bandpass;

  ImageSpec spec;
  spec.pixels = 16;
  spec.half_span_urad = 8.0;
  ZeroLossSpot spot;
  spot.enabled = true;
  spot.amplitude = 123.0;
  spot.sigma_urad = 0.8;

  const LADImage with_spot = coinccl::lad_image(
      LadMode::plain, cfg, mirror, curves, efilter, no_bandpass, spec, spot);
  const LADImage without = coinccl::lad_image(
      LadMode::plain, cfg, mirror, curves, efilter, no_bandpass, spec);
  // near the center the Gaussian dominates
  const std::size_t mid = spec.pixels / 2;
  const double tx = with_spot.theta_x_urad(mid);
  const double ty = with_spot.theta_y_urad(mid);
  const double expected =
      123.0 * std::exp(-0.5 * (tx * tx + ty * ty) / (0.8 * 0.8));
  CHECK(with_spot.counts(mid, mid) - without.counts(mid, mid) ==
        doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("plain ring at 3 eV sits on the light line") {
  const SlabConfig cfg = silicon_slab();
  const MirrorModel mirror = MirrorModel::horseshoe();
  const EfficiencyCurves curves = bundled_curves();
  ElectronEnergyFilter efilter;
  efilter.center_eV = 3.0;
  efilter.halfwidth_eV = 0.25;
  efilter.enabled = true;
  const PhotonBandpass no_bandpass;

  ImageSpec spec;
  spec.pixels = 96;
  spec.half_span_urad = 10.0;
  const LADImage img = coinccl::lad_image(LadMode::plain, cfg, mirror, curves,
                                          efilter, no_bandpass, spec);
  const RadialProfile profile = coinccl::radial_profile(img);
  const coinccl::PeakEstimate peak = coinccl::most_probable_deflection(profile);
  const double theta_ll = light_line_theta_urad(3.0, cfg);
  CHECK(std::abs(peak.theta_urad - theta_ll) / theta_ll < 0.10);
}

TEST_CASE("plain-profile peak radius grows with the filter energy") {
  const SlabConfig cfg = silicon_slab();
  const MirrorModel mirror = MirrorModel::horseshoe();
  const EfficiencyCurves curves = bundled_curves();
  const PhotonBandpass no_bandpass;

  ImageSpec spec;
  spec.pixels = 64;
  spec.half_span_urad = 10.0;
  double prev = 0.0;
  for (double ec : {2.0, 2.5, 3.0, 3.5}) {
    ElectronEnergyFilter efilter;
    efilter.center_eV = ec;
    efilter.halfwidth_eV = 0.25;
    efilter.enabled = true;
    const LADImage img = coinccl::lad_image(LadMode::plain, cfg, mirror, curves,
                                            efilter, no_bandpass, spec);
    const coinccl::PeakEstimate peak =
        coinccl::most_probable_deflection(coinccl::radial_profile(img));
    CHECK(peak.theta_urad > prev);
    prev = peak.theta_urad;
  }
}

TEST_CASE("radial profile of a delta ring peaks at the ring radius") {
  LADImage img;
  const std::size_t n = 33;
  img.counts = coinccl::Matrix(n, n);
  img.pitch_urad = 0.5;
  img.center_px = (static_cast<double>(n) - 1.0) / 2.0;
  img.beam_wavenumber_per_nm = 2505.323185;
  const double r0 = 9.0;  // pixels
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const double d = std::hypot(static_cast<double>(r) - img.center_px,
                                  static_cast<double>(c) - img.center_px);
      if (std::abs(d - r0) < 0.5)
        img.counts(r, c) = 1.0;
    }
  const RadialProfile profile = coinccl::radial_profile(img);
  std::size_t best = 0;
  for (std::size_t k = 1; k < profile.intensity.size(); ++k)
    if (profile.intensity[k] > profile.intensity[best])
      best = k;
  CHECK(std::abs(static_cast<double>(best) - r0) <= 1.0);
  CHECK(profile.intensity[0] == 0.0);
  CHECK(profile.theta_urad[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(profile.qperp_per_nm[1] ==
        doctest::Approx(0.5e-6 * 2505.323185).epsilon(1e-12));
}

TEST_CASE("all-zero image gives an all-zero profile and no peak") {
  LADImage img;
  img.counts = coinccl::Matrix(17, 17);
  img.pitch_urad = 1.0;
  img.center_px = 8.0;
  img.beam_wavenumber_per_nm = 2505.323185;
  const RadialProfile profile = coinccl::radial_profile(img);
  for (double v : profile.intensity)
    CHECK(v == 0.0);
  CHECK_THROWS_AS(coinccl::most_probable_deflection(profile),
                  coinccl::validation_error);
}

TEST_CASE("peak estimation on synthetic profiles") {
  RadialProfile p;
  p.theta_urad = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  p.qperp_per_nm = p.theta_urad;

  SUBCASE("single populated bin returns that bin center") {
    p.intensity = {0.0, 0.0, 0.0, 7.0, 0.0, 0.0};
    const coinccl::PeakEstimate est = coinccl::most_probable_deflection(p);
    CHECK(est.theta_urad == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(est.uncertainty_urad == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("symmetric triangle resolves to the exact apex") {
    p.intensity = {0.0, 1.0, 2.0, 1.0, 0.0, 0.0};
    const coinccl::PeakEstimate est = coinccl::most_probable_deflection(p);
    CHECK(est.theta_urad == doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("asymmetric peak shifts by the three-point parabola formula") {
    p.intensity = {0.0, 1.0, 3.0, 2.0, 0.0, 0.0};
    const coinccl::PeakEstimate est = coinccl::most_probable_deflection(p);
    // delta = 0.5*(ym - yp)/(ym - 2*y0 + yp) = 0.5*(1-2)/(1-6+2) = 1/6
    CHECK(est.theta_urad == doctest::Approx(2.0 + 1.0 / 6.0).epsilon(1e-13));
  }
  SUBCASE("empty profile is a validation error") {
    RadialProfile empty;
    CHECK_THROWS_AS(coinccl::most_probable_deflection(empty),
                    coinccl::validation_error);
  }
}

TEST_CASE("synthetic 550 nm ring lands at the kinematic light-line angle") {
  const SlabConfig cfg = silicon_slab();
  const double e550 = kc::photon_eV_nm / 550.0;
  const double theta_ll = light_line_theta_urad(e550, cfg);

  LADImage img;
  const std::size_t n = 161;
  img.counts = coinccl::Matrix(n, n);
  img.pitch_urad = 0.0625;
  img.center_px = (static_cast<double>(n) - 1.0) / 2.0;
  img.beam_wavenumber_per_nm = cfg.beam.wavenumber_per_nm;
  const double r0 = theta_ll / img.pitch_urad;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const double d = std::hypot(static_cast<double>(r) - img.center_px,
                                  static_cast<double>(c) - img.center_px);
      if (std::abs(d - r0) < 0.75)
        img.counts(r, c) = 1.0;
    }
  const coinccl::PeakEstimate est =
      coinccl::most_probable_deflection(coinccl::radial_profile(img));
  CHECK(std::abs(est.theta_urad - theta_ll) <= img.pitch_urad);
}

TEST_CASE("image spec validation") {
  const SlabConfig cfg = silicon_slab();
  const MirrorModel mirror = MirrorModel::horseshoe();
  const EfficiencyCurves curves = bundled_curves();
  const ElectronEnergyFilter efilter;
  const PhotonBandpass bp;
  ImageSpec bad;
  bad.pixels = 1;
  CHECK_THROWS_AS(coinccl::lad_image(LadMode::plain, cfg, mirror, curves,
                                     efilter, bp, bad),
                  coinccl::validation_error);
  bad.pixels = 16;
  bad.half_span_urad = 0.0;
  CHECK_THROWS_AS(coinccl::lad_image(LadMode::plain, cfg, mirror, curves,
                                     efilter, bp, bad),
                  coinccl::validation_error);
}
