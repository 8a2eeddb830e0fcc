#pragma once

namespace cavsq {

/// Frozen adiabatic-elimination deviations (dispersive preset, r = 1.1, cap 2, ratio 20,
/// horizon = effective T_pi, 101 samples). Measured 0.02873 (N = 1) and 0.03785 (N = 2).
inline constexpr double kAdiabaticToleranceN1Ratio20 = 0.0290;
inline constexpr double kAdiabaticToleranceN2Ratio20 = 0.0380;
inline constexpr int kAdiabaticSamples = 101;

}  // namespace cavsq
