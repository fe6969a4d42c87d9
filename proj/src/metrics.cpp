// SPDX-License-Identifier: Apache-2.0
#include "hydroptic/metrics.hpp"

#include "hydroptic/error.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace hydroptic::metrics {

namespace {

void check_same_shape(const ImagePlane& a, const ImagePlane& b) {
    if (a.width() != b.width() || a.height() != b.height() || a.empty())
        throw_invariant("metrics: image shape mismatch");
}

// SSIM parameters from Wang, Bovik, Sheikh, Simoncelli, "Image quality
// assessment: from error visibility to structural similarity", IEEE TIP 2004.
constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;
constexpr double kDynamicRange = 255.0;

std::array<double, kWindow> gaussian_taps() {
    std::array<double, kWindow> taps{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double x = i - kWindow / 2;
        taps[i] = std::exp(-(x * x) / (2.0 * kSigma * kSigma));
        sum += taps[i];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

// Horizontal then vertical pass over a single plane; output is the valid
// region only, (h - kWindow + 1) x (w - kWindow + 1).
std::vector<double> separable_blur(const std::vector<double>& plane, int w, int h,
                                   const std::array<double, kWindow>& taps) {
    const int vw = w - kWindow + 1;
    const int vh = h - kWindow + 1;
    std::vector<double> horiz(static_cast<std::size_t>(vw) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < vw; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k)
                acc += taps[k] * plane[static_cast<std::size_t>(y) * w + x + k];
            horiz[static_cast<std::size_t>(y) * vw + x] = acc;
        }
    std::vector<double> out(static_cast<std::size_t>(vw) * vh);
    for (int y = 0; y < vh; ++y)
        for (int x = 0; x < vw; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k)
                acc += taps[k] * horiz[static_cast<std::size_t>(y + k) * vw + x];
            out[static_cast<std::size_t>(y) * vw + x] = acc;
        }
    return out;
}

// One plane pair on the 8-bit scale.
double ssim_plane(const std::vector<double>& pa, const std::vector<double>& pb,
                  int w, int h) {
    static const std::array<double, kWindow> taps = gaussian_taps();
    const double c1 = (kK1 * kDynamicRange) * (kK1 * kDynamicRange);
    const double c2 = (kK2 * kDynamicRange) * (kK2 * kDynamicRange);

    const std::size_t n = pa.size();
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = pa[i] * pa[i];
        bb[i] = pb[i] * pb[i];
        ab[i] = pa[i] * pb[i];
    }

    const auto mu_a = separable_blur(pa, w, h, taps);
    const auto mu_b = separable_blur(pb, w, h, taps);
    const auto m_aa = separable_blur(aa, w, h, taps);
    const auto m_bb = separable_blur(bb, w, h, taps);
    const auto m_ab = separable_blur(ab, w, h, taps);

    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double va = m_aa[i] - mu_a[i] * mu_a[i];
        const double vb = m_bb[i] - mu_b[i] * mu_b[i];
        const double cov = m_ab[i] - mu_a[i] * mu_b[i];
        const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
        const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2);
        total += num / den;
    }
    return total / static_cast<double>(mu_a.size());
}

std::vector<double> extract_plane(const ImagePlane& img, int c) {
    std::vector<double> plane(static_cast<std::size_t>(img.width()) * img.height());
    const float* src = img.values().data();
    for (std::size_t i = 0; i < plane.size(); ++i)
        plane[i] = static_cast<double>(src[i * 3 + c]) * 255.0;
    return plane;
}

std::vector<double> luma_plane(const ImagePlane& img) {
    std::vector<double> plane(static_cast<std::size_t>(img.width()) * img.height());
    const float* src = img.values().data();
    for (std::size_t i = 0; i < plane.size(); ++i) {
        const double r = src[i * 3 + 0], g = src[i * 3 + 1], b = src[i * 3 + 2];
        plane[i] = (0.299 * r + 0.587 * g + 0.114 * b) * 255.0;
    }
    return plane;
}

} // namespace

double mse(const ImagePlane& a, const ImagePlane& b) {
    check_same_shape(a, b);
    const auto va = a.values();
    const auto vb = b.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        const double d = (static_cast<double>(va[i]) - static_cast<double>(vb[i])) * 255.0;
        sum += d * d;
    }
    return sum / static_cast<double>(va.size());
}

double psnr(const ImagePlane& a, const ImagePlane& b, double peak) {
    const double err = mse(a, b);
    if (err <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / err));
}

double ssim(const ImagePlane& a, const ImagePlane& b, const SsimOptions& opts) {
    check_same_shape(a, b);
    if (a.width() < kWindow || a.height() < kWindow)
        throw_invariant("ssim: image smaller than the 11x11 window");

    if (opts.grayscale)
        return ssim_plane(luma_plane(a), luma_plane(b), a.width(), a.height());

    double total = 0.0;
    for (int c = 0; c < 3; ++c)
        total += ssim_plane(extract_plane(a, c), extract_plane(b, c), a.width(), a.height());
    return total / 3.0;
}

MetricReport evaluate_pair(const ImagePlane& candidate, const ImagePlane& reference,
                           const SsimOptions& opts) {
    MetricReport r;
    r.mse = mse(candidate, reference);
    r.psnr = psnr(candidate, reference);
    r.psnr_capped = (r.mse <= 0.0);
    r.ssim = ssim(candidate, reference, opts);
    r.uiqm = uiqm(candidate);
    return r;
}

} // namespace hydroptic::metrics
