// SPDX-License-Identifier: Apache-2.0
#include "hydroptic/metrics.hpp"

#include "hydroptic/error.hpp"
#include "hydroptic/uiqm_constants.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hydroptic::metrics {

namespace uc = uiqm_constants;

namespace {

// Alpha-trimmed mean (trim floor(alpha*N) from each end of the sorted
// values) and the second moment about it taken over all values.
struct TrimmedStats {
    double mean = 0.0;
    double second_moment = 0.0;
};

TrimmedStats trimmed_stats(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    const auto trim = static_cast<std::size_t>(
        std::floor(uc::kTrimAlpha * static_cast<double>(n)));
    double sum = 0.0;
    for (std::size_t i = trim; i < n - trim; ++i) sum += values[i];
    TrimmedStats st;
    st.mean = sum / static_cast<double>(n - 2 * trim);
    double sq = 0.0;
    for (double v : values) {
        const double d = v - st.mean;
        sq += d * d;
    }
    st.second_moment = sq / static_cast<double>(n);
    return st;
}

double uicm(const ImagePlane& img) {
    const std::size_t n = static_cast<std::size_t>(img.width()) * img.height();
    std::vector<double> rg(n), yb(n);
    const float* src = img.values().data();
    for (std::size_t i = 0; i < n; ++i) {
        const double r = src[i * 3 + 0] * 255.0;
        const double g = src[i * 3 + 1] * 255.0;
        const double b = src[i * 3 + 2] * 255.0;
        rg[i] = r - g;
        yb[i] = (r + g) / 2.0 - b;
    }
    const TrimmedStats srg = trimmed_stats(std::move(rg));
    const TrimmedStats syb = trimmed_stats(std::move(yb));
    return uc::kMuWeight * std::hypot(srg.mean, syb.mean) +
           uc::kSigmaWeight * std::sqrt(srg.second_moment + syb.second_moment);
}

// 3x3 Sobel gradient magnitude with edge replication, one plane.
std::vector<double> sobel_magnitude(const std::vector<double>& plane, int w, int h) {
    std::vector<double> mag(plane.size());
    auto at = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return plane[static_cast<std::size_t>(y) * w + x];
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double gx = -at(x - 1, y - 1) + at(x + 1, y - 1) -
                              2.0 * at(x - 1, y) + 2.0 * at(x + 1, y) -
                              at(x - 1, y + 1) + at(x + 1, y + 1);
            const double gy = -at(x - 1, y - 1) - 2.0 * at(x, y - 1) - at(x + 1, y - 1) +
                              at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1);
            mag[static_cast<std::size_t>(y) * w + x] = std::hypot(gx, gy);
        }
    return mag;
}

// EME over complete blocks: (2 / blocks) * sum ln(max/min); blocks whose
// extremes touch zero contribute nothing.
double eme(const std::vector<double>& plane, int w, int h) {
    const int bx = w / uc::kBlockSize;
    const int by = h / uc::kBlockSize;
    double sum = 0.0;
    for (int j = 0; j < by; ++j)
        for (int i = 0; i < bx; ++i) {
            double lo = plane[static_cast<std::size_t>(j * uc::kBlockSize) * w +
                              i * uc::kBlockSize];
            double hi = lo;
            for (int y = j * uc::kBlockSize; y < (j + 1) * uc::kBlockSize; ++y)
                for (int x = i * uc::kBlockSize; x < (i + 1) * uc::kBlockSize; ++x) {
                    const double v = plane[static_cast<std::size_t>(y) * w + x];
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            if (lo > 0.0 && hi > 0.0) sum += std::log(hi / lo);
        }
    return 2.0 / (static_cast<double>(bx) * by) * sum;
}

double uism(const ImagePlane& img) {
    const int w = img.width();
    const int h = img.height();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    const float* src = img.values().data();

    const double weights[3] = {uc::kLumaR, uc::kLumaG, uc::kLumaB};
    double score = 0.0;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> plane(n);
        for (std::size_t i = 0; i < n; ++i)
            plane[i] = static_cast<double>(src[i * 3 + c]) * 255.0;
        std::vector<double> edges = sobel_magnitude(plane, w, h);
        for (std::size_t i = 0; i < n; ++i) edges[i] *= plane[i]; // grayscale edge map
        score += weights[c] * eme(edges, w, h);
    }
    return score;
}

// logAMEE on the intensity plane: blockwise Michelson contrast c with
// entropy weighting c*ln(c), averaged with a sign flip so higher contrast
// scores higher.
double uiconm(const ImagePlane& img) {
    const int w = img.width();
    const int h = img.height();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    const float* src = img.values().data();
    std::vector<double> intensity(n);
    for (std::size_t i = 0; i < n; ++i)
        intensity[i] = (static_cast<double>(src[i * 3 + 0]) +
                        static_cast<double>(src[i * 3 + 1]) +
                        static_cast<double>(src[i * 3 + 2])) /
                       3.0 * 255.0;

    const int bx = w / uc::kBlockSize;
    const int by = h / uc::kBlockSize;
    double sum = 0.0;
    for (int j = 0; j < by; ++j)
        for (int i = 0; i < bx; ++i) {
            double lo = intensity[static_cast<std::size_t>(j * uc::kBlockSize) * w +
                                  i * uc::kBlockSize];
            double hi = lo;
            for (int y = j * uc::kBlockSize; y < (j + 1) * uc::kBlockSize; ++y)
                for (int x = i * uc::kBlockSize; x < (i + 1) * uc::kBlockSize; ++x) {
                    const double v = intensity[static_cast<std::size_t>(y) * w + x];
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            const double top = hi - lo;
            const double bot = hi + lo;
            if (top > 0.0 && bot > 0.0) {
                const double contrast = top / bot;
                sum += contrast * std::log(contrast);
            }
        }
    return -1.0 / (static_cast<double>(bx) * by) * sum;
}

} // namespace

UiqmBreakdown uiqm(const ImagePlane& img) {
    if (img.empty()) throw_invariant("uiqm: empty image");
    if (img.width() < uc::kBlockSize || img.height() < uc::kBlockSize)
        throw_invariant("uiqm: image smaller than one measurement block");

    UiqmBreakdown out;
    out.uicm = uicm(img);
    out.uism = uism(img);
    out.uiconm = uiconm(img);
    out.uiqm = uc::kC1 * out.uicm + uc::kC2 * out.uism + uc::kC3 * out.uiconm;
    return out;
}

} // namespace hydroptic::metrics
