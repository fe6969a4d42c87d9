// SPDX-License-Identifier: Apache-2.0
#include "hydroptic/spectral.hpp"

#include "hydroptic/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hydroptic::spectral {

namespace {

void validate_samples(CurveKind kind, std::span<const double> w,
                      std::span<const double> v) {
    if (w.size() != v.size())
        throw_invariant("spectral curve: wavelength/value count mismatch");
    if (w.size() < 2)
        throw_invariant("spectral curve: fewer than 2 samples");
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!std::isfinite(w[i]) || !std::isfinite(v[i]))
            throw_invariant("spectral curve: non-finite sample");
        if (i > 0 && !(w[i] > w[i - 1]))
            throw_invariant("spectral curve: wavelengths not strictly increasing");
        if (kind == CurveKind::SensorResponse && (v[i] < 0.0 || v[i] > 1.0))
            throw_invariant("sensor response values must lie in [0,1]");
        if (kind == CurveKind::Attenuation && v[i] < 0.0)
            throw_invariant("attenuation values must be nonnegative");
    }
}

} // namespace

SpectralCurve SpectralCurve::make(CurveKind kind, std::vector<double> wavelengths_nm,
                                  std::vector<double> values) {
    validate_samples(kind, wavelengths_nm, values);
    return SpectralCurve(kind, std::move(wavelengths_nm), std::move(values));
}

double SpectralCurve::sample(double nm) const {
    if (nm < min_nm() || nm > max_nm()) {
        if (kind_ == CurveKind::SensorResponse) return 0.0;
        return nm < min_nm() ? values_.front() : values_.back(); // edge-held
    }
    auto it = std::upper_bound(wavelengths_nm_.begin(), wavelengths_nm_.end(), nm);
    if (it == wavelengths_nm_.end()) return values_.back();
    if (it == wavelengths_nm_.begin()) return values_.front();
    const std::size_t hi = static_cast<std::size_t>(it - wavelengths_nm_.begin());
    const std::size_t lo = hi - 1;
    const double t = (nm - wavelengths_nm_[lo]) /
                     (wavelengths_nm_[hi] - wavelengths_nm_[lo]);
    return values_[lo] + t * (values_[hi] - values_[lo]);
}

SpectralCurve resample(const SpectralCurve& curve, std::span<const double> grid_nm) {
    if (grid_nm.empty())
        throw_invariant("resample: empty grid");
    for (std::size_t i = 1; i < grid_nm.size(); ++i)
        if (!(grid_nm[i] > grid_nm[i - 1]))
            throw_invariant("resample: grid not strictly increasing");

    std::vector<double> w(grid_nm.begin(), grid_nm.end());
    std::vector<double> v(grid_nm.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        v[i] = curve.sample(w[i]);
    return SpectralCurve(curve.kind(), std::move(w), std::move(v));
}

namespace {

// Union of both curves' knots restricted to [a,b], plus the bounds, with
// each interval subdivided to at most max_step_nm. Trapezoid on this grid is
// exact for the piecewise-linear interpolants except at the refinement step.
std::vector<double> quadrature_grid(const SpectralCurve& beta,
                                    const SpectralCurve& response,
                                    const IntegrationBounds& bounds,
                                    double max_step_nm) {
    std::vector<double> knots;
    knots.push_back(bounds.a_nm);
    knots.push_back(bounds.b_nm);
    for (const auto* c : {&beta, &response})
        for (double w : c->wavelengths_nm())
            if (w > bounds.a_nm && w < bounds.b_nm) knots.push_back(w);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    std::vector<double> grid;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        grid.push_back(knots[i]);
        const double span = knots[i + 1] - knots[i];
        const auto pieces = static_cast<std::size_t>(std::ceil(span / max_step_nm));
        for (std::size_t k = 1; k < pieces; ++k)
            grid.push_back(knots[i] + span * static_cast<double>(k) /
                                          static_cast<double>(pieces));
    }
    grid.push_back(knots.back());
    return grid;
}

double trapezoid(std::span<const double> x, std::span<const double> f) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        sum += 0.5 * (f[i] + f[i + 1]) * (x[i + 1] - x[i]);
    return sum;
}

} // namespace

double total_attenuation(const SpectralCurve& beta, const SpectralCurve& response,
                         const IntegrationBounds& bounds, const QuadratureOptions& opts) {
    if (beta.kind() != CurveKind::Attenuation)
        throw_invariant("total_attenuation: first curve must be an attenuation spectrum");
    if (response.kind() != CurveKind::SensorResponse)
        throw_invariant("total_attenuation: second curve must be a sensor response");
    if (!(bounds.a_nm < bounds.b_nm))
        throw_invariant("integration bounds require a < b");
    if (!(opts.max_step_nm > 0.0))
        throw_invariant("quadrature step must be positive");

    const std::vector<double> grid = quadrature_grid(beta, response, bounds, opts.max_step_nm);
    std::vector<double> product(grid.size());
    std::vector<double> weight(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double b = beta.sample(grid[i]);
        const double s = response.sample(grid[i]);
        if (!std::isfinite(b) || !std::isfinite(s))
            throw_invariant("total_attenuation: non-finite sample in integrand");
        product[i] = b * s;
        weight[i] = s;
    }

    const double integral = trapezoid(grid, product);
    if (!opts.normalize) return integral;

    const double norm = trapezoid(grid, weight);
    if (norm <= 0.0)
        throw_invariant("total_attenuation: response integrates to zero over the band");
    return integral / norm;
}

ChannelAttenuation channel_attenuations(const SpectralCurve& beta,
                                        const SensorResponses& responses,
                                        const IntegrationBounds& bounds,
                                        const QuadratureOptions& opts) {
    return ChannelAttenuation{
        total_attenuation(beta, responses.r, bounds, opts),
        total_attenuation(beta, responses.g, bounds, opts),
        total_attenuation(beta, responses.b, bounds, opts),
    };
}

SpectralCurve load_spectral_csv(const std::filesystem::path& path, CurveKind kind) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw_parse(path.string() + ": empty file");
    // Tolerate a UTF-8 BOM and trailing CR from foreign editors.
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "wavelength_nm,value")
        throw_parse(path.string() + ": expected header 'wavelength_nm,value'");

    std::vector<double> w, v;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        double wl = 0.0, val = 0.0;
        char comma = 0;
        if (!(ss >> wl >> comma >> val) || comma != ',')
            throw_parse(path.string() + ":" + std::to_string(lineno) + ": bad sample line");
        w.push_back(wl);
        v.push_back(val);
    }
    try {
        return SpectralCurve::make(kind, std::move(w), std::move(v));
    } catch (const Error& e) {
        throw_parse(path.string() + ": " + e.what());
    }
}

} // namespace hydroptic::spectral
