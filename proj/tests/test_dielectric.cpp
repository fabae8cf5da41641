#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <sstream>
#include <string>

#include "coinccl/dielectric.hpp"
#include "coinccl/errors.hpp"

using coinccl::DielectricSample;
using coinccl::DielectricTable;

namespace {

const std::string kDataDir = std::string(COINCCL_REPO_DIR) + "/data";

DielectricTable silicon() {
  return DielectricTable::load_csv_file(kDataDir + "/silicon_eps.csv");
}

}  // namespace

TEST_CASE("two-row csv loads verbatim") {
  std::istringstream in("1.0,13.6,0.04\n3.0,27.2,8.0");
  const DielectricTable t = DielectricTable::load_csv(in, "inline");
  CHECK(t.samples().size() == 2);
  CHECK(t.min_energy() == 1.0);
  CHECK(t.max_energy() == 3.0);
  CHECK(t.permittivity(1.0) == std::complex<double>(13.6, 0.04));
  CHECK(t.permittivity(3.0) == std::complex<double>(27.2, 8.0));
}

TEST_CASE("rows out of order are rejected") {
  std::istringstream in("3.0,27.2,8.0\n1.0,13.6,0.04");
  CHECK_THROWS_AS(DielectricTable::load_csv(in, "inline"),
                  coinccl::validation_error);
}

TEST_CASE("negative absorption is rejected") {
  std::istringstream in("1.0,13.6,-0.04\n3.0,27.2,8.0");
  CHECK_THROWS_AS(DielectricTable::load_csv(in, "inline"),
                  coinccl::validation_error);
}

TEST_CASE("malformed row reports file and line") {
  std::istringstream in("1.0,13.6,0.04\n2.0,not_a_number,0.1\n");
  try {
    DielectricTable::load_csv(in, "bad.csv");
    FAIL("expected parse_error");
  } catch (const coinccl::parse_error& e) {
    CHECK(e.path == "bad.csv");
    CHECK(e.line == 2);
  }
}

TEST_CASE("comments and a header row are tolerated") {
  std::istringstream in(
      "# optical constants\nenergy_eV,eps_re,eps_im\n1.0,2.0,0.0\n2.0,3.0,0.5\n");
  const DielectricTable t = DielectricTable::load_csv(in, "inline");
  CHECK(t.samples().size() == 2);
}

TEST_CASE("missing file raises an io error") {
  CHECK_THROWS_AS(DielectricTable::load_csv_file("/nonexistent/eps.csv"),
                  coinccl::io_error);
}

TEST_CASE("single sample is not a table") {
  CHECK_THROWS_AS(DielectricTable::from_samples({{1.0, 2.0, 0.0}}),
                  coinccl::validation_error);
}

TEST_CASE("interpolation reproduces nodes exactly") {
  const DielectricTable t = DielectricTable::from_samples(
      {{1.0, 5.0, 0.1}, {2.0, 7.0, 0.3}, {4.0, 1.0, 2.0}});
  CHECK(t.permittivity(1.0) == std::complex<double>(5.0, 0.1));
  CHECK(t.permittivity(2.0) == std::complex<double>(7.0, 0.3));
  CHECK(t.permittivity(4.0) == std::complex<double>(1.0, 2.0));
}

TEST_CASE("midpoint is the arithmetic mean of the bracketing nodes") {
  const DielectricTable t =
      DielectricTable::from_samples({{1.0, 5.0, 0.1}, {2.0, 7.0, 0.3}});
  const std::complex<double> mid = t.permittivity(1.5);
  CHECK(mid.real() == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(mid.imag() == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("queries outside the table range are rejected") {
  const DielectricTable t =
      DielectricTable::from_samples({{1.0, 5.0, 0.1}, {2.0, 7.0, 0.3}});
  CHECK_THROWS_AS(t.permittivity(0.999), coinccl::domain_error);
  CHECK_THROWS_AS(t.permittivity(2.001), coinccl::domain_error);
  CHECK_THROWS_AS(t.refractive_index(0.5), coinccl::domain_error);
}

TEST_CASE("piecewise linearity between nodes") {
  const DielectricTable t =
      DielectricTable::from_samples({{1.0, 2.0, 0.0}, {3.0, 6.0, 1.0}});
  for (double f : {0.25, 0.5, 0.75}) {
    const double e = 1.0 + 2.0 * f;
    const std::complex<double> eps = t.permittivity(e);
    CHECK(eps.real() == doctest::Approx(2.0 + 4.0 * f).epsilon(1e-14));
    CHECK(eps.imag() == doctest::Approx(f).epsilon(1e-14));
  }
}

TEST_CASE("refractive index is the principal square root") {
  const DielectricTable t =
      DielectricTable::from_samples({{1.0, 1.0, 0.0}, {2.0, 16.0, 0.0}});
  CHECK(t.refractive_index(1.0) == std::complex<double>(1.0, 0.0));
  CHECK(t.refractive_index(2.0).real() == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(t.refractive_index(2.0).imag() == doctest::Approx(0.0));
}

TEST_CASE("refractive index branch keeps Re n nonnegative") {
  const DielectricTable t =
      DielectricTable::from_samples({{1.0, -4.0, 0.0}, {2.0, -9.0, 0.1}});
  CHECK(t.refractive_index(1.0).real() >= 0.0);
  CHECK(t.refractive_index(1.5).real() >= 0.0);
  CHECK(t.refractive_index(2.0).real() >= 0.0);
}

TEST_CASE("bundled silicon table spans the optical range") {
  const DielectricTable t = silicon();
  CHECK(t.min_energy() <= 0.5);
  CHECK(t.max_energy() >= 5.0);
  for (const DielectricSample& s : t.samples())
    CHECK(s.eps_im >= 0.0);
}

TEST_CASE("silicon refractive index is about 4 in the visible") {
  const DielectricTable t = silicon();
  const double n25 = t.refractive_index(2.5).real();
  CHECK(n25 == doctest::Approx(4.0).epsilon(0.20));
  // strong normal dispersion toward the direct gap
  CHECK(t.refractive_index(3.0).real() > t.refractive_index(2.0).real());
}
