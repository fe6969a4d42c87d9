// SPDX-License-Identifier: Apache-2.0
#include "hydroptic/imaging.hpp"

#include "hydroptic/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace hydroptic::imaging {

namespace {

void check_finite_nonnegative(const spectral::ChannelAttenuation& p) {
    for (double v : {p.r, p.g, p.b})
        if (!std::isfinite(v) || v < 0.0)
            throw_invariant("channel attenuation must be finite and nonnegative");
}

float clamp01(float v) { return std::clamp(v, 0.0f, 1.0f); }

} // namespace

void RestoreParams::validate() const {
    if (!(t0 > 0.0 && t0 <= 1.0))
        throw_invariant("t0 must lie in (0,1]");
    if (keep_lo < 0 || keep_hi > 255 || keep_lo >= keep_hi)
        throw_invariant("keep range requires 0 <= lo < hi <= 255");
}

ChannelTriple transmission(const spectral::ChannelAttenuation& p, double distance_m) {
    check_finite_nonnegative(p);
    if (!(distance_m > 0.0))
        throw_invariant("camera-object distance must be positive");
    return {std::exp(-p.r * distance_m), std::exp(-p.g * distance_m),
            std::exp(-p.b * distance_m)};
}

ChannelTriple airlight(const spectral::ChannelAttenuation& p, double dive_depth_m) {
    check_finite_nonnegative(p);
    if (dive_depth_m < 0.0)
        throw_invariant("dive depth must be nonnegative");
    return {std::exp(-p.r * dive_depth_m), std::exp(-p.g * dive_depth_m),
            std::exp(-p.b * dive_depth_m)};
}

ImagePlane degrade(const ImagePlane& scene, const ChannelTriple& t, const ChannelTriple& A) {
    for (int c = 0; c < 3; ++c) {
        if (!(t[c] > 0.0 && t[c] <= 1.0))
            throw_invariant("transmission must lie in (0,1]");
        if (!(A[c] >= 0.0 && A[c] <= 1.0))
            throw_invariant("airlight must lie in [0,1]");
    }
    if (scene.empty()) throw_invariant("degrade: empty image");

    ImagePlane out(scene.width(), scene.height());
    const double tc[3] = {t.r, t.g, t.b};
    const double ac[3] = {A.r, A.g, A.b};
    const float* src = scene.values().data();
    float* dst = out.values().data();
    const std::size_t n = scene.sample_count();
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % 3);
        const double v = static_cast<double>(src[i]) * tc[c] + ac[c] * (1.0 - tc[c]);
        dst[i] = clamp01(static_cast<float>(v));
    }
    return out;
}

ImagePlane restore(const ImagePlane& observed, const ChannelTriple& t,
                   const ChannelTriple& A, const RestoreParams& params) {
    params.validate();
    for (int c = 0; c < 3; ++c) {
        if (!(t[c] > 0.0 && t[c] <= 1.0))
            throw_invariant("transmission must lie in (0,1]");
        if (!(A[c] >= 0.0 && A[c] <= 1.0))
            throw_invariant("airlight must lie in [0,1]");
    }
    if (observed.empty()) throw_invariant("restore: empty image");

    ImagePlane out(observed.width(), observed.height());
    const double tc[3] = {std::max(t.r, params.t0), std::max(t.g, params.t0),
                          std::max(t.b, params.t0)};
    const double ac[3] = {A.r, A.g, A.b};
    const float* src = observed.values().data();
    float* dst = out.values().data();
    const std::size_t n = observed.sample_count();

    // Inversion everywhere; inputs outside the trusted 8-bit keep range are
    // clamped into gamut immediately so they cannot dominate the rescale.
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % 3);
        const float in = src[i];
        double v = (static_cast<double>(in) - ac[c]) / tc[c] + ac[c];
        const int code = quantize8(in);
        if (code < params.keep_lo || code > params.keep_hi)
            v = std::clamp(v, 0.0, 1.0);
        dst[i] = static_cast<float>(v);
    }

    if (params.rescale) {
        for (int c = 0; c < 3; ++c) {
            float lo = dst[c], hi = dst[c];
            for (std::size_t i = c; i < n; i += 3) {
                lo = std::min(lo, dst[i]);
                hi = std::max(hi, dst[i]);
            }
            if (hi > lo) {
                const double scale = 1.0 / (static_cast<double>(hi) - lo);
                for (std::size_t i = c; i < n; i += 3)
                    dst[i] = static_cast<float>((static_cast<double>(dst[i]) - lo) * scale);
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i)
        dst[i] = clamp01(dst[i]);
    return out;
}

ImagePlane restore_with_geometry(const ImagePlane& observed,
                                 const spectral::ChannelAttenuation& p,
                                 const SceneGeometry& geom, const RestoreParams& params,
                                 std::vector<std::string>* warnings) {
    if (warnings && (geom.distance_m < 1.0 || geom.distance_m > 5.0))
        warnings->push_back("distance " + std::to_string(geom.distance_m) +
                            " m outside the assumed 1-5 m working range");
    const ChannelTriple t = transmission(p, geom.distance_m);
    const ChannelTriple A = airlight(p, geom.dive_depth_m);
    return restore(observed, t, A, params);
}

SceneGeometry load_geometry_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw_parse(path.string() + ": " + e.what());
    }
    if (!j.contains("distance_m") || !j.contains("dive_depth_m"))
        throw_parse(path.string() + ": geometry sidecar needs distance_m and dive_depth_m");
    SceneGeometry g;
    g.distance_m = j.at("distance_m").get<double>();
    g.dive_depth_m = j.at("dive_depth_m").get<double>();
    if (!(g.distance_m > 0.0) || g.dive_depth_m < 0.0)
        throw_invariant(path.string() + ": distance must be > 0 and depth >= 0");
    return g;
}

} // namespace hydroptic::imaging
