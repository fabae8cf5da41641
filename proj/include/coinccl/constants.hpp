#pragma once

#include <numbers>

// Physical constants used throughout. Everything downstream works in
// eV / nm / ns, so only these conversion factors appear in formulas.
namespace coinccl::constants {

inline constexpr double hbar_c_eV_nm = 197.3269804;
inline constexpr double electron_mass_eV = 510998.95;
inline constexpr double c_nm_per_ns = 299.792458;
inline constexpr double elementary_charge_C = 1.602176634e-19;
inline constexpr double vacuum_permittivity_F_per_m = 8.8541878128e-12;

// e^2/(4 pi eps0) in eV nm; the only place SI charge units enter.
inline constexpr double coulomb_eV_nm =
    elementary_charge_C * 1e9 /
    (4.0 * std::numbers::pi * vacuum_permittivity_F_per_m);

// lambda(nm) = photon_eV_nm / E(eV)
inline constexpr double photon_eV_nm = 2.0 * std::numbers::pi * hbar_c_eV_nm;

} // namespace coinccl::constants
