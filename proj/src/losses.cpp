// SPDX-License-Identifier: Apache-2.0
#include "hydroptic/losses.hpp"

#include "hydroptic/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace hydroptic::losses {

namespace {

// Below this, a direction is numerically meaningless and cosine similarity
// (and its gradient) is treated as undefined.
constexpr double kNormFloor = 1e-150;

double mean_sq(std::span<const double> xs, double shift) {
    double sum = 0.0;
    for (double x : xs) {
        const double d = x - shift;
        sum += d * d;
    }
    return sum / static_cast<double>(xs.size());
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> normalized(std::span<const double> v, const char* what) {
    const double n = norm(v);
    if (!std::isfinite(n) || n < kNormFloor)
        throw_invariant(std::string(what) + ": zero-norm vector");
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// -log softmax of entry 0 among `scaled` scores, via log-sum-exp.
double nll_of_first(std::span<const double> scaled) {
    const double m = *std::max_element(scaled.begin(), scaled.end());
    double sum = 0.0;
    for (double s : scaled) sum += std::exp(s - m);
    return -(scaled[0] - m) + std::log(sum);
}

void check_scores(const std::vector<double>& xs, const char* what) {
    if (xs.empty()) throw_invariant(std::string(what) + ": empty score list");
    for (double x : xs)
        if (!std::isfinite(x)) throw_invariant(std::string(what) + ": non-finite score");
}

} // namespace

double lsgan_loss(const DiscriminatorScores& scores) {
    check_scores(scores.real, "lsgan_loss");
    check_scores(scores.fake, "lsgan_loss");
    return mean_sq(scores.real, 0.0) + mean_sq(scores.fake, 1.0);
}

double lsgan_d_loss(const DiscriminatorScores& scores) {
    check_scores(scores.real, "lsgan_d_loss");
    check_scores(scores.fake, "lsgan_d_loss");
    return mean_sq(scores.real, 1.0) + mean_sq(scores.fake, 0.0);
}

double lsgan_g_loss(std::span<const double> fake_scores) {
    if (fake_scores.empty()) throw_invariant("lsgan_g_loss: empty score list");
    return mean_sq(fake_scores, 1.0);
}

double infonce(std::span<const double> query, std::span<const double> positive,
               std::span<const std::vector<double>> negatives, double tau) {
    return infonce_with_grad(query, positive, negatives, tau, {});
}

double infonce_with_grad(std::span<const double> query, std::span<const double> positive,
                         std::span<const std::vector<double>> negatives, double tau,
                         std::span<double> grad_query) {
    if (!(tau > 0.0)) throw_invariant("infonce: tau must be positive");
    if (negatives.empty()) throw_invariant("infonce: at least one negative required");
    if (positive.size() != query.size())
        throw_invariant("infonce: dimension mismatch");
    for (const auto& n : negatives)
        if (n.size() != query.size()) throw_invariant("infonce: dimension mismatch");

    // Normalize first: cosines of adversarially scaled inputs stay exact and
    // finite this way.
    const double qnorm = norm(query);
    if (!std::isfinite(qnorm) || qnorm < kNormFloor)
        throw_invariant("infonce: zero-norm vector");
    std::vector<double> qhat(query.size());
    for (std::size_t i = 0; i < query.size(); ++i) qhat[i] = query[i] / qnorm;

    const std::size_t count = 1 + negatives.size();
    std::vector<std::vector<double>> others;
    others.reserve(count);
    others.push_back(normalized(positive, "infonce"));
    for (const auto& n : negatives) others.push_back(normalized(n, "infonce"));

    std::vector<double> scaled(count);
    for (std::size_t i = 0; i < count; ++i) scaled[i] = dot(qhat, others[i]) / tau;
    const double loss = nll_of_first(scaled);

    if (!grad_query.empty()) {
        if (grad_query.size() != query.size())
            throw_invariant("infonce: gradient span size mismatch");
        // softmax over the scaled scores
        const double m = *std::max_element(scaled.begin(), scaled.end());
        double z = 0.0;
        for (double s : scaled) z += std::exp(s - m);
        std::fill(grad_query.begin(), grad_query.end(), 0.0);
        for (std::size_t i = 0; i < count; ++i) {
            const double p = std::exp(scaled[i] - m) / z;
            const double w = (p - (i == 0 ? 1.0 : 0.0)) / tau;
            // d cos(q, x)/dq = (xhat - cos * qhat) / |q|
            const double cosi = scaled[i] * tau;
            for (std::size_t k = 0; k < query.size(); ++k)
                grad_query[k] += w * (others[i][k] - cosi * qhat[k]) / qnorm;
        }
    }
    return loss;
}

namespace {

void check_stack_shapes(const FeatureStack& x, const FeatureStack& gx) {
    if (x.layers.empty()) throw_invariant("patchnce: empty feature stack");
    if (x.layers.size() != gx.layers.size())
        throw_invariant("patchnce: layer count mismatch (" +
                        std::to_string(x.layers.size()) + " vs " +
                        std::to_string(gx.layers.size()) + ")");
    for (std::size_t l = 0; l < x.layers.size(); ++l) {
        const auto& a = x.layers[l];
        const auto& b = gx.layers[l];
        if (a.locations != b.locations || a.channels != b.channels)
            throw_invariant("patchnce: layer " + std::to_string(l) + " shape mismatch (" +
                            std::to_string(a.locations) + "x" + std::to_string(a.channels) +
                            " vs " + std::to_string(b.locations) + "x" +
                            std::to_string(b.channels) + ")");
        if (a.locations < 2)
            throw_invariant("patchnce: layer " + std::to_string(l) +
                            " needs at least 2 locations");
        if (a.data.size() != a.locations * a.channels ||
            b.data.size() != b.locations * b.channels)
            throw_invariant("patchnce: layer " + std::to_string(l) + " data size mismatch");
        for (double v : a.data)
            if (!std::isfinite(v)) throw_invariant("patchnce: non-finite feature");
        for (double v : b.data)
            if (!std::isfinite(v)) throw_invariant("patchnce: non-finite feature");
    }
}

} // namespace

double patchnce(const FeatureStack& features_x, const FeatureStack& features_gx,
                double tau) {
    if (!(tau > 0.0)) throw_invariant("patchnce: tau must be positive");
    check_stack_shapes(features_x, features_gx);

    double total = 0.0;
    for (std::size_t l = 0; l < features_x.layers.size(); ++l) {
        const auto& lx = features_x.layers[l];
        const auto& lgx = features_gx.layers[l];
        const std::size_t S = lx.locations;

        std::vector<std::vector<double>> xhat(S), ghat(S);
        for (std::size_t s = 0; s < S; ++s) {
            xhat[s] = normalized(lx.row(s), "patchnce");
            ghat[s] = normalized(lgx.row(s), "patchnce");
        }

        // Each location is an (S)-way classification against the source
        // layer, with the matching location as the positive class.
        std::vector<double> scaled(S);
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t j = 0; j < S; ++j)
                scaled[j] = dot(ghat[s], xhat[j]) / tau;
            std::swap(scaled[0], scaled[s]);
            total += nll_of_first(scaled);
        }
    }
    return total;
}

double patchnce_reference(const FeatureStack& features_x,
                          const FeatureStack& features_gx, double tau) {
    if (!(tau > 0.0)) throw_invariant("patchnce_reference: tau must be positive");
    check_stack_shapes(features_x, features_gx);

    auto cosine = [](std::span<const double> a, std::span<const double> b) {
        double ab = 0.0, aa = 0.0, bb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            ab += a[i] * b[i];
            aa += a[i] * a[i];
            bb += b[i] * b[i];
        }
        const double denom = std::sqrt(aa) * std::sqrt(bb);
        if (!(denom >= kNormFloor))
            throw_invariant("patchnce_reference: zero-norm vector");
        return ab / denom;
    };

    double total = 0.0;
    for (std::size_t l = 0; l < features_x.layers.size(); ++l) {
        const auto& lx = features_x.layers[l];
        const auto& lgx = features_gx.layers[l];
        for (std::size_t s = 0; s < lx.locations; ++s) {
            const double pos = std::exp(cosine(lgx.row(s), lx.row(s)) / tau);
            double denom = pos;
            for (std::size_t j = 0; j < lx.locations; ++j)
                if (j != s) denom += std::exp(cosine(lgx.row(s), lx.row(j)) / tau);
            total += -std::log(pos / denom);
        }
    }
    return total;
}

double identity_l1(std::span<const double> generated, std::span<const double> target) {
    if (generated.size() != target.size() || generated.empty())
        throw_invariant("identity_l1: shape mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < generated.size(); ++i)
        sum += std::abs(generated[i] - target[i]);
    return sum / static_cast<double>(generated.size());
}

double identity_l1(const ImagePlane& generated, const ImagePlane& target) {
    if (generated.width() != target.width() || generated.height() != target.height() ||
        generated.empty())
        throw_invariant("identity_l1: shape mismatch");
    double sum = 0.0;
    const auto a = generated.values();
    const auto b = target.values();
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    return sum / static_cast<double>(a.size());
}

double identity_l1_with_grad(std::span<const double> generated,
                             std::span<const double> target,
                             std::span<double> grad_generated) {
    if (grad_generated.size() != generated.size())
        throw_invariant("identity_l1: gradient span size mismatch");
    const double value = identity_l1(generated, target);
    const double inv_n = 1.0 / static_cast<double>(generated.size());
    for (std::size_t i = 0; i < generated.size(); ++i) {
        const double d = generated[i] - target[i];
        grad_generated[i] = (d > 0.0 ? inv_n : (d < 0.0 ? -inv_n : 0.0));
    }
    return value;
}

double full_objective(double gan, double nce, double idt, const LossWeights& w) {
    for (double v : {gan, nce, idt})
        if (!std::isfinite(v)) throw_invariant("full_objective: non-finite component");
    if (w.lambda_gan < 0.0 || w.lambda_nce < 0.0 || w.lambda_idt < 0.0)
        throw_invariant("full_objective: weights must be nonnegative");
    return w.lambda_gan * gan + w.lambda_nce * nce + w.lambda_idt * idt;
}

double grad_check(const std::function<double(std::span<const double>)>& f,
                  std::span<const double> x, std::span<const double> analytic,
                  double eps) {
    if (x.size() != analytic.size())
        throw_invariant("grad_check: gradient size mismatch");
    if (!(eps > 0.0)) throw_invariant("grad_check: eps must be positive");

    std::vector<double> point(x.begin(), x.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double saved = point[i];
        point[i] = saved + eps;
        const double fp = f(point);
        point[i] = saved - eps;
        const double fm = f(point);
        point[i] = saved;
        const double fd = (fp - fm) / (2.0 * eps);
        const double denom = std::max(std::abs(fd), std::abs(analytic[i]));
        const double err = std::abs(fd - analytic[i]);
        worst = std::max(worst, denom < 1e-12 ? err : err / denom);
    }
    return worst;
}

FeatureStack load_feature_stack_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw_parse(path.string() + ": " + e.what());
    }
    if (!j.contains("layers") || !j.at("layers").is_array())
        throw_parse(path.string() + ": expected top-level 'layers' array");

    FeatureStack stack;
    for (const auto& layer : j.at("layers")) {
        FeatureLayer fl;
        try {
            fl.locations = layer.at("s").get<std::size_t>();
            fl.channels = layer.at("c").get<std::size_t>();
            fl.data = layer.at("data").get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw_parse(path.string() + ": " + e.what());
        }
        if (fl.data.size() != fl.locations * fl.channels)
            throw_parse(path.string() + ": layer data length != s*c");
        stack.layers.push_back(std::move(fl));
    }
    if (stack.layers.empty()) throw_parse(path.string() + ": no layers");
    return stack;
}

void save_feature_stack_json(const FeatureStack& stack, const std::filesystem::path& path) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : stack.layers)
        layers.push_back({{"s", l.locations}, {"c", l.channels}, {"data", l.data}});
    std::ofstream out(path);
    if (!out) throw_io("cannot create " + path.string());
    out << nlohmann::json{{"layers", layers}}.dump(2) << "\n";
}

} // namespace hydroptic::losses
