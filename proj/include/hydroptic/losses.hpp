// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hydroptic/image.hpp"

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace hydroptic::losses {

/// Objective weights and the contrastive temperature.
struct LossWeights {
    double lambda_gan = 1.0;
    double lambda_nce = 1.0;
    double lambda_idt = 10.0;
    double tau = 0.07;
};

struct DiscriminatorScores {
    std::vector<double> real; // D(y)
    std::vector<double> fake; // D(G(x))
};

/// Least-squares adversarial objective in its published form:
/// mean(real^2) + mean((1 - fake)^2).
double lsgan_loss(const DiscriminatorScores& scores);

/// Conventional least-squares GAN discriminator objective,
/// mean((real - 1)^2) + mean(fake^2), kept as an explicit variant for
/// comparison against translation-framework training code.
double lsgan_d_loss(const DiscriminatorScores& scores);

/// Conventional least-squares GAN generator objective, mean((fake - 1)^2).
double lsgan_g_loss(std::span<const double> fake_scores);

/// (N+1)-way cross-entropy selecting the positive over N negatives via
/// temperature-scaled cosine similarities, evaluated through log-sum-exp.
double infonce(std::span<const double> query, std::span<const double> positive,
               std::span<const std::vector<double>> negatives, double tau);

/// Same value, plus the analytic gradient with respect to the query vector.
double infonce_with_grad(std::span<const double> query, std::span<const double> positive,
                         std::span<const std::vector<double>> negatives, double tau,
                         std::span<double> grad_query);

/// One layer of extracted features: `locations` row vectors of `channels`
/// dims, row-major.
struct FeatureLayer {
    std::size_t locations = 0;
    std::size_t channels = 0;
    std::vector<double> data;

    std::span<const double> row(std::size_t s) const {
        return {data.data() + s * channels, channels};
    }
};

struct FeatureStack {
    std::vector<FeatureLayer> layers;
};

/// Patchwise contrastive loss over all layers and spatial locations. The
/// query at (l,s) comes from the translated image's stack, the positive is
/// the same location of the source stack, and the negatives are the other
/// locations of that source layer. Returns the sum over (l,s); averaging
/// over images is the caller's concern.
double patchnce(const FeatureStack& features_x, const FeatureStack& features_gx,
                double tau);

/// Independent slow route: per-(l,s) scalar loop with directly computed
/// cosines, no log-sum-exp factoring. Kept as the cross-check half of the
/// dual-route verification; do not fold into patchnce.
double patchnce_reference(const FeatureStack& features_x,
                          const FeatureStack& features_gx, double tau);

/// Mean absolute difference, elementwise.
double identity_l1(const ImagePlane& generated, const ImagePlane& target);
double identity_l1(std::span<const double> generated, std::span<const double> target);

/// Same value, plus the analytic gradient with respect to the generated
/// input. Undefined where any residual is exactly zero.
double identity_l1_with_grad(std::span<const double> generated,
                             std::span<const double> target,
                             std::span<double> grad_generated);

/// Weighted total: lambda_gan * gan + lambda_nce * nce + lambda_idt * idt.
double full_objective(double gan, double nce, double idt, const LossWeights& w = {});

/// Max relative deviation between an analytic gradient and central finite
/// differences of `f` at `x`.
double grad_check(const std::function<double(std::span<const double>)>& f,
                  std::span<const double> x, std::span<const double> analytic,
                  double eps);

/// JSON stack format: {"layers":[{"s":int,"c":int,"data":[row-major floats]}]}.
FeatureStack load_feature_stack_json(const std::filesystem::path& path);
void save_feature_stack_json(const FeatureStack& stack, const std::filesystem::path& path);

} // namespace hydroptic::losses
