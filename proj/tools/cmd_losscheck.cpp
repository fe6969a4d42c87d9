// SPDX-License-Identifier: Apache-2.0
#include "common.hpp"

#include "hydroptic/error.hpp"
#include "hydroptic/losses.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>

namespace hydroptic::cli {

namespace {

// Raw-draw uniforms keep the sequences identical across standard libraries.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double gaussian(std::mt19937_64& rng) {
    const double u1 = std::max(uniform01(rng), 1e-300);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

losses::FeatureStack random_stack(std::mt19937_64& rng, const std::vector<std::size_t>& s,
                                  const std::vector<std::size_t>& c) {
    losses::FeatureStack stack;
    for (std::size_t l = 0; l < s.size(); ++l) {
        losses::FeatureLayer layer;
        layer.locations = s[l];
        layer.channels = c[l];
        layer.data.resize(s[l] * c[l]);
        for (double& v : layer.data) v = gaussian(rng);
        stack.layers.push_back(std::move(layer));
    }
    return stack;
}

struct CheckPrinter {
    bool all_ok = true;

    void report(const char* name, double value, double limit) {
        const bool ok = value <= limit;
        all_ok = all_ok && ok;
        std::printf("%-22s max deviation %.3e (limit %.0e)  %s\n", name, value, limit,
                    ok ? "PASS" : "FAIL");
    }
};

} // namespace

int cmd_losscheck(bool random, std::uint64_t seed, int trials, double tau,
                  const std::string& features_x, const std::string& features_gx) {
    CheckPrinter printer;

    if (!features_x.empty() || !features_gx.empty()) {
        if (features_x.empty() || features_gx.empty())
            throw_parse("--features-x and --features-gx must be given together");
        const auto x = losses::load_feature_stack_json(features_x);
        const auto gx = losses::load_feature_stack_json(features_gx);
        const double fast = losses::patchnce(x, gx, tau);
        const double slow = losses::patchnce_reference(x, gx, tau);
        printer.report("patchnce-oracle", std::abs(fast - slow), 1e-10);
        std::printf("patchnce value: %.12f\n", fast);
        return printer.all_ok ? kExitOk : kExitInvariant;
    }

    if (!random) throw_parse("losscheck needs --random or a fixture pair");
    std::mt19937_64 rng(seed);

    // PatchNCE against the independent per-location loop.
    double worst_patchnce = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const std::size_t layers = 1 + rng() % 3;
        std::vector<std::size_t> s, c;
        for (std::size_t l = 0; l < layers; ++l) {
            s.push_back(2 + rng() % 7);  // 2..8 locations
            c.push_back(2 + rng() % 15); // 2..16 channels
        }
        const auto x = random_stack(rng, s, c);
        const auto gx = random_stack(rng, s, c);
        worst_patchnce = std::max(
            worst_patchnce,
            std::abs(losses::patchnce(x, gx, tau) - losses::patchnce_reference(x, gx, tau)));
    }
    printer.report("patchnce-oracle", worst_patchnce, 1e-10);

    // Analytic query gradient against central differences.
    double worst_grad = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const std::size_t dim = 3 + rng() % 14;
        const std::size_t negs = 1 + rng() % 8;
        std::vector<double> query(dim), positive(dim);
        std::vector<std::vector<double>> negatives(negs, std::vector<double>(dim));
        for (double& v : query) v = gaussian(rng);
        for (double& v : positive) v = gaussian(rng);
        for (auto& neg : negatives)
            for (double& v : neg) v = gaussian(rng);

        std::vector<double> grad(dim);
        losses::infonce_with_grad(query, positive, negatives, tau, grad);
        const auto f = [&](std::span<const double> q) {
            return losses::infonce(q, positive, negatives, tau);
        };
        worst_grad = std::max(worst_grad, losses::grad_check(f, query, grad, 1e-5));
    }
    printer.report("infonce-grad", worst_grad, 1e-4);

    // Symmetric point: equal similarity to the positive and every negative
    // must give exactly the uniform (N+1)-way cross-entropy.
    double worst_sym = 0.0;
    for (std::size_t n = 1; n <= 16; ++n) {
        std::vector<double> v(4);
        for (double& x : v) x = gaussian(rng);
        const std::vector<std::vector<double>> negatives(n, v);
        const double loss = losses::infonce(v, v, negatives, tau);
        worst_sym = std::max(worst_sym,
                             std::abs(loss - std::log(static_cast<double>(n) + 1.0)));
    }
    printer.report("infonce-symmetric", worst_sym, 1e-12);

    // Cosine normalization: rescaling any one input is a no-op.
    double worst_scale = 0.0;
    {
        std::vector<double> query(6), positive(6);
        std::vector<std::vector<double>> negatives(3, std::vector<double>(6));
        for (double& v : query) v = gaussian(rng);
        for (double& v : positive) v = gaussian(rng);
        for (auto& neg : negatives)
            for (double& v : neg) v = gaussian(rng);
        const double base = losses::infonce(query, positive, negatives, tau);
        for (double alpha : {1e-6, 1.0, 1e6}) {
            auto scaled = query;
            for (double& v : scaled) v *= alpha;
            worst_scale = std::max(
                worst_scale, std::abs(losses::infonce(scaled, positive, negatives, tau) - base));
        }
    }
    printer.report("infonce-scale-inv", worst_scale, 1e-9);

    // Default objective weights: unit components weigh out to 1+1+10.
    printer.report("objective-weights", std::abs(losses::full_objective(1, 1, 1) - 12.0),
                   1e-15);

    return printer.all_ok ? kExitOk : kExitInvariant;
}

} // namespace hydroptic::cli
