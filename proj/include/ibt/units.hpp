#pragma once

// Unit conversions at the library boundary. Everything inside the library is
// in Hartree atomic units (hbar = 1) with dimensionless oscillator coordinates.

namespace ibt::units {

inline constexpr double hartree_per_wavenumber = 1.0 / 219474.6313632;
inline constexpr double boltzmann_hartree_per_kelvin = 3.166811563e-6;
inline constexpr double atomic_time_per_fs = 41.341373335;

constexpr double wavenumber_to_hartree(double cm1) { return cm1 * hartree_per_wavenumber; }
constexpr double fs_to_atomic_time(double fs) { return fs * atomic_time_per_fs; }
constexpr double atomic_time_to_fs(double t) { return t / atomic_time_per_fs; }

}  // namespace ibt::units
