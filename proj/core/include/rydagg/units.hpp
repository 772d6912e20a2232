#pragma once

// Internal unit system: lengths in micrometers, times in microseconds,
// energies as angular frequencies (rad/us) with hbar = 1. Masses then carry
// units of hbar*us/um^2.

#include <numbers>

namespace rydagg::units {

inline constexpr double kHbarSI = 1.054571817e-34;  // J s
inline constexpr double kMicro = 1e-6;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Dispersion coefficient quoted as a linear frequency ("MHz um^k") to rad/us um^k.
/// This is the one place where the 2*pi reading of "MHz" is applied.
constexpr double frequency_coefficient(double mhz_um_k) { return kTwoPi * mhz_um_k; }

constexpr double mass_from_kg(double kg) {
  return kg * (kMicro * kMicro) / (kHbarSI * kMicro);
}

/// Ground-state velocity width of a harmonic trap of position width sigma.
constexpr double velocity_width(double mass_internal, double sigma_um) {
  return 1.0 / (mass_internal * sigma_um);
}

}  // namespace rydagg::units
