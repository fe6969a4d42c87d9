// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hydroptic/image.hpp"
#include "hydroptic/spectral.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace hydroptic::imaging {

/// Per-channel scalar triple (transmission, airlight, ...).
struct ChannelTriple {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    double operator[](int c) const { return c == 0 ? r : (c == 1 ? g : b); }
};

/// Camera-object distance and dive depth for one frame. The distance is a
/// single scalar per image; frames eligible for restoration are shot at
/// close, constant range.
struct SceneGeometry {
    double distance_m = 0.0;
    double dive_depth_m = 0.0;
};

struct RestoreParams {
    /// Lower bound on the transmission used in the inversion denominator.
    double t0 = 0.1;
    /// 8-bit input intensities inside [lo,hi] are trusted by the inversion;
    /// values below lo are clamped into gamut after inversion instead of
    /// being excluded.
    int keep_lo = 13;
    int keep_hi = 255;
    /// Per-channel min-max stretch to [0,1] after the inversion.
    bool rescale = true;

    void validate() const;
};

/// t^c = exp(-p^c d) per channel.
ChannelTriple transmission(const spectral::ChannelAttenuation& p, double distance_m);

/// Background light from dive depth: A^c = exp(-p^c phi). Replaces the
/// brightest-pixel heuristic, which artificial lighting breaks.
ChannelTriple airlight(const spectral::ChannelAttenuation& p, double dive_depth_m);

/// Forward model: I = J t + A (1 - t), clamped to [0,1].
ImagePlane degrade(const ImagePlane& scene, const ChannelTriple& t, const ChannelTriple& A);

/// Inverse model: J = (I - A) / max(t, t0) + A, followed by the keep-range
/// clamp and the optional per-channel min-max rescale. Flat channels are
/// left unscaled by the rescale step.
ImagePlane restore(const ImagePlane& observed, const ChannelTriple& t,
                   const ChannelTriple& A, const RestoreParams& params = {});

/// Full pipeline: transmission + airlight from geometry, then restore.
/// Distances outside the 1-5 m working assumption produce a warning, not an
/// error.
ImagePlane restore_with_geometry(const ImagePlane& observed,
                                 const spectral::ChannelAttenuation& p,
                                 const SceneGeometry& geom,
                                 const RestoreParams& params = {},
                                 std::vector<std::string>* warnings = nullptr);

/// JSON sidecar { "distance_m": float, "dive_depth_m": float }.
SceneGeometry load_geometry_json(const std::filesystem::path& path);

} // namespace hydroptic::imaging
