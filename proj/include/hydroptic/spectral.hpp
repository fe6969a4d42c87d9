// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hydroptic::spectral {

enum class CurveKind { SensorResponse, Attenuation };

/// Tabulated function over wavelength (nm), linearly interpolated between
/// samples. Sensor responses are unitless in [0,1] and fall to zero outside
/// their tabulated support (sensors are band-limited); attenuation spectra
/// are in 1/m, nonnegative, and hold their edge value outside the support
/// (the water column does not stop attenuating past the table).
class SpectralCurve {
public:
    static SpectralCurve make(CurveKind kind,
                              std::vector<double> wavelengths_nm,
                              std::vector<double> values);

    CurveKind kind() const { return kind_; }
    std::size_t size() const { return wavelengths_nm_.size(); }
    std::span<const double> wavelengths_nm() const { return wavelengths_nm_; }
    std::span<const double> values() const { return values_; }
    double min_nm() const { return wavelengths_nm_.front(); }
    double max_nm() const { return wavelengths_nm_.back(); }

    /// Value at an arbitrary wavelength, applying the kind-specific
    /// out-of-support rule.
    double sample(double nm) const;

    friend SpectralCurve resample(const SpectralCurve&, std::span<const double>);

private:
    SpectralCurve(CurveKind kind, std::vector<double> w, std::vector<double> v)
        : kind_(kind), wavelengths_nm_(std::move(w)), values_(std::move(v)) {}

    CurveKind kind_;
    std::vector<double> wavelengths_nm_;
    std::vector<double> values_;
};

/// Per-channel total attenuation coefficients (1/m), one per RGB channel.
struct ChannelAttenuation {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
};

/// Human visible band used for the channel integrals.
struct IntegrationBounds {
    double a_nm = 400.0;
    double b_nm = 750.0;
};

struct QuadratureOptions {
    /// Divide by the integral of the sensor response so a constant spectrum
    /// integrates to itself. Off reproduces the bare product integral.
    bool normalize = true;
    /// Intervals of the merged sample grid are subdivided down to this
    /// spacing before the trapezoid rule is applied.
    double max_step_nm = 1.0;
};

/// Evaluate the curve on a new wavelength grid (strictly increasing,
/// non-empty). Out-of-support points follow the curve's extension rule.
SpectralCurve resample(const SpectralCurve& curve, std::span<const double> grid_nm);

/// Channel total attenuation: trapezoid quadrature of attenuation x response
/// over [a,b] on the union of both sample grids, refined to the requested
/// step. Normalized mode returns the response-weighted mean attenuation.
double total_attenuation(const SpectralCurve& beta,
                         const SpectralCurve& response,
                         const IntegrationBounds& bounds = {},
                         const QuadratureOptions& opts = {});

struct SensorResponses {
    SpectralCurve r;
    SpectralCurve g;
    SpectralCurve b;
};

ChannelAttenuation channel_attenuations(const SpectralCurve& beta,
                                        const SensorResponses& responses,
                                        const IntegrationBounds& bounds = {},
                                        const QuadratureOptions& opts = {});

/// CSV with header "wavelength_nm,value", one sample per line, wavelengths
/// strictly increasing.
SpectralCurve load_spectral_csv(const std::filesystem::path& path, CurveKind kind);

} // namespace hydroptic::spectral
