// SPDX-License-Identifier: Apache-2.0
#pragma once

// Every numeric parameter of the UIQM family in one place. All values are
// transcribed from:
//
//   K. Panetta, C. Gao, S. Agaian, "Human-Visual-System-Inspired Underwater
//   Image Quality Measures", IEEE Journal of Oceanic Engineering 41(3), 2015.
//
// Do not inline copies of these elsewhere; the point of this header is that
// the non-obvious numbers are auditable against that reference.

namespace hydroptic::metrics::uiqm_constants {

// Linear combination UIQM = c1*UICM + c2*UISM + c3*UIConM.
inline constexpr double kC1 = 0.0282;
inline constexpr double kC2 = 0.2953;
inline constexpr double kC3 = 3.5753;

// UICM = kMuWeight * sqrt(mu_RG^2 + mu_YB^2)
//      + kSigmaWeight * sqrt(sigma_RG^2 + sigma_YB^2)
// over the opponent chrominance planes RG = R - G and YB = (R+G)/2 - B.
inline constexpr double kMuWeight = -0.0268;
inline constexpr double kSigmaWeight = 0.1586;

// Asymmetric alpha-trimmed mean: fraction trimmed from each end of the
// sorted chrominance values (floor(alpha*N) samples per side).
inline constexpr double kTrimAlpha = 0.1;

// UISM luma weights applied to the per-channel edge-map EME scores.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

// Block edge length for the EME (sharpness) and logAMEE (contrast)
// measures; partial blocks at the right/bottom borders are discarded.
inline constexpr int kBlockSize = 10;

} // namespace hydroptic::metrics::uiqm_constants
