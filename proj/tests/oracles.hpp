#pragma once

// Reference values computed outside this code base (hand arithmetic and an
// independent Python/SciPy implementation) and frozen here.

#include <cmath>

namespace oracle {

inline constexpr double kRelTol = 1e-9;

inline bool rel_close(double got, double want, double tol = kRelTol) {
  if (want == 0.0) return std::abs(got) <= tol;
  return std::abs(got - want) <= tol * std::abs(want);
}

// pathloss, dB
inline constexpr double kMacroPl1000m = 128.1;
inline constexpr double kSmallPl100m = 104.0;
inline constexpr double kMacroPl2000m = 139.418727836966;

// thermal noise, dBm
inline constexpr double kNoise10MHzNf9 = -95.0;
inline constexpr double kNoise1Hz = -174.0;
inline constexpr double kNoise10MHz = -104.0;

// received power, dBm
inline constexpr double kRxMacro = -68.1;
inline constexpr double kRxScbs = -77.0;

// SINR with one -75 dBm interferer, signal -68.1 dBm, noise -95 dBm
inline constexpr double kSinrOneInterferer = 6.85678626217358;

// Welch, a = [12, 11, 13, 12], b = [8, 9, 7, 8]
inline constexpr double kWelchT = 6.92820323027551;
inline constexpr double kWelchDf = 6.0;
inline constexpr double kWelchOneSidedP = 0.000223910828026595;

// modified Shannon, B = 10 MHz
inline constexpr double kCapAtSinrEff = 5.6e6;
inline constexpr double kCapAt60dB = 44e6;

// pattern gain, dB (single patch 7 dBi, 90 deg, 15 dB floor)
inline constexpr double kSingleAt0 = 7.0;
inline constexpr double kSingleAt45 = 4.0;
inline constexpr double kSingleAt180 = -8.0;

// misalignment at which double (10/60/20) and single (7/90/15) patches give
// equal gain
inline constexpr double kPatchGainCrossoverDeg = 40.2492235949962;

// gamma_HS at hotspot (150, 120) with an omni SCBS at (110, 120); ISD 500 m,
// default radio
inline constexpr double kGammaFixtureDb = -28.9693329062086;

}  // namespace oracle
