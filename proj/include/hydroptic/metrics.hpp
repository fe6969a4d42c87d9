// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hydroptic/image.hpp"

namespace hydroptic::metrics {

/// Finite stand-in for the +inf PSNR of identical images; machine-readable
/// output carries a separate capped marker.
inline constexpr double kPsnrCap = 100.0;

/// Mean squared difference on the 8-bit scale (0-255).
double mse(const ImagePlane& a, const ImagePlane& b);

/// 10*log10(peak^2 / mse), capped at kPsnrCap when mse is zero.
double psnr(const ImagePlane& a, const ImagePlane& b, double peak = 255.0);

struct SsimOptions {
    /// Compare Rec.601 luma planes instead of averaging the RGB channels.
    bool grayscale = false;
};

/// Single-scale SSIM, 11x11 Gaussian window sigma=1.5, K1=0.01, K2=0.03,
/// dynamic range 255, averaged over the valid (fully-windowed) map.
double ssim(const ImagePlane& a, const ImagePlane& b, const SsimOptions& opts = {});

struct UiqmBreakdown {
    double uicm = 0.0;   // colorfulness
    double uism = 0.0;   // sharpness
    double uiconm = 0.0; // contrast
    double uiqm = 0.0;
};

/// No-reference underwater quality measure; see uiqm_constants.hpp for the
/// provenance of every coefficient.
UiqmBreakdown uiqm(const ImagePlane& img);

struct MetricReport {
    double mse = 0.0;
    double psnr = 0.0;
    bool psnr_capped = false;
    double ssim = 0.0;
    UiqmBreakdown uiqm; // of the candidate image
};

/// Full-reference metrics of candidate vs reference plus the candidate's
/// no-reference scores.
MetricReport evaluate_pair(const ImagePlane& candidate, const ImagePlane& reference,
                           const SsimOptions& opts = {});

} // namespace hydroptic::metrics
