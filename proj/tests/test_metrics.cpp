// SPDX-License-Identifier: Apache-2.0
#include "hydroptic/metrics.hpp"

#include "hydroptic/error.hpp"
#include "hydroptic/imaging.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace hydroptic;

TEST_CASE("mse on the 8-bit scale") {
    testutil::DetRng rng(1);
    ImagePlane a = testutil::random_image(rng, 8, 8);
    // Snap to 8-bit codes below 255 so a one-code shift never clamps.
    for (float& v : a.values())
        v = dequantize8(static_cast<std::uint8_t>(std::min(254, int(quantize8(v)))));
    CHECK(metrics::mse(a, a) == 0.0);

    ImagePlane plus_one = a;
    for (float& v : plus_one.values()) v += 1.0f / 255.0f; // one 8-bit code everywhere
    CHECK(metrics::mse(plus_one, a) == doctest::Approx(1.0).epsilon(1e-4));

    const ImagePlane b = testutil::random_image(rng, 8, 8);
    CHECK(metrics::mse(a, b) == doctest::Approx(oracle::mse(a, b)).epsilon(1e-12));
    CHECK(metrics::mse(a, b) == metrics::mse(b, a));

    const ImagePlane other(4, 4);
    CHECK_THROWS_AS(metrics::mse(a, other), Error);
}

TEST_CASE("psnr formula and cap") {
    const ImagePlane black(8, 8, 0.0f);
    const ImagePlane white(8, 8, 1.0f);
    // mse = 255^2 -> 0 dB
    CHECK(metrics::psnr(black, white) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(metrics::psnr(black, black) == metrics::kPsnrCap);

    // strictly decreasing in mse over the regular range
    testutil::DetRng rng(2);
    const ImagePlane base = testutil::random_image(rng, 8, 8);
    double prev = metrics::kPsnrCap;
    for (float delta : {0.02f, 0.05f, 0.1f, 0.3f}) {
        ImagePlane shifted = base;
        for (float& v : shifted.values()) v = std::clamp(v + delta, 0.0f, 1.0f);
        const double cur = metrics::psnr(shifted, base);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("table-style psnr spot value") {
    // 10*log10(255^2 / 127.23) in the pooled-MSE convention
    const double direct = 10.0 * std::log10(255.0 * 255.0 / 127.23);
    CHECK(direct == doctest::Approx(27.0853).epsilon(1e-4));
}

TEST_CASE("ssim basics") {
    testutil::DetRng rng(3);
    const ImagePlane a = testutil::smooth_random_image(rng, 24, 24);

    SUBCASE("identical images give exactly one") {
        CHECK(metrics::ssim(a, a) == 1.0);
    }
    SUBCASE("inverted image scores low") {
        ImagePlane inv = a;
        for (float& v : inv.values()) v = 1.0f - v;
        CHECK(metrics::ssim(a, inv) < 0.5);
    }
    SUBCASE("constant images follow the zero-variance closed form") {
        const ImagePlane ca(16, 16, 80.0f / 255.0f);
        const ImagePlane cb(16, 16, 120.0f / 255.0f);
        // Means as actually stored (the 80/255 float is not exactly 80/255).
        const double mu_a = static_cast<double>(ca.at(0, 0, 0)) * 255.0;
        const double mu_b = static_cast<double>(cb.at(0, 0, 0)) * 255.0;
        const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
        const double want = (2.0 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1);
        CHECK(metrics::ssim(ca, cb) == doctest::Approx(want).epsilon(1e-9));
    }
    SUBCASE("window size precondition") {
        const ImagePlane tiny(8, 8, 0.5f);
        CHECK_THROWS_AS(metrics::ssim(tiny, tiny), Error);
    }
}

TEST_CASE("ssim agrees with the direct windowed oracle") {
    testutil::DetRng rng(5);
    for (int trial = 0; trial < 3; ++trial) {
        const ImagePlane a = testutil::smooth_random_image(rng, 20, 16);
        ImagePlane b = a;
        for (float& v : b.values())
            v = std::clamp(v + static_cast<float>(rng.range(-0.1, 0.1)), 0.0f, 1.0f);
        CHECK(metrics::ssim(a, b) == doctest::Approx(oracle::ssim(a, b)).epsilon(1e-6));
        CHECK(metrics::ssim(a, b, {.grayscale = true}) ==
              doctest::Approx(oracle::ssim(a, b, true)).epsilon(1e-6));
    }
}

TEST_CASE("ssim symmetry and shift stability") {
    testutil::DetRng rng(7);
    const ImagePlane a = testutil::smooth_random_image(rng, 16, 16);
    ImagePlane b = a;
    for (float& v : b.values())
        v = std::clamp(v + static_cast<float>(rng.range(-0.08, 0.08)), 0.0f, 1.0f);

    CHECK(metrics::ssim(a, b) == doctest::Approx(metrics::ssim(b, a)).epsilon(1e-12));

    // common luminance shift barely moves the stabilized score
    ImagePlane a2 = a, b2 = b;
    for (float& v : a2.values()) v = std::clamp(v + 0.05f, 0.0f, 1.0f);
    for (float& v : b2.values()) v = std::clamp(v + 0.05f, 0.0f, 1.0f);
    CHECK(metrics::ssim(a2, b2) == doctest::Approx(metrics::ssim(a, b)).epsilon(5e-3));
}

TEST_CASE("uiqm components") {
    SUBCASE("a pure gray image has exactly zero colorfulness") {
        testutil::DetRng rng(9);
        ImagePlane gray(20, 20);
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 20; ++x) {
                const float v = static_cast<float>(rng.uniform01());
                gray.at(x, y, 0) = v;
                gray.at(x, y, 1) = v;
                gray.at(x, y, 2) = v;
            }
        CHECK(metrics::uiqm(gray).uicm == 0.0);
    }

    SUBCASE("agrees with the independently written oracle") {
        testutil::DetRng rng(11);
        for (int trial = 0; trial < 3; ++trial) {
            const ImagePlane img = testutil::smooth_random_image(rng, 30, 20);
            const auto got = metrics::uiqm(img);
            const auto want = oracle::uiqm(img);
            CHECK(got.uicm == doctest::Approx(want.uicm).epsilon(1e-9));
            CHECK(got.uism == doctest::Approx(want.uism).epsilon(1e-9));
            CHECK(got.uiconm == doctest::Approx(want.uiconm).epsilon(1e-9));
            CHECK(got.uiqm == doctest::Approx(want.uiqm).epsilon(1e-9));
        }
    }

    SUBCASE("90-degree rotation changes the score by less than 1%") {
        testutil::DetRng rng(13);
        const ImagePlane img = testutil::smooth_random_image(rng, 40, 40);
        ImagePlane rot(40, 40);
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 40; ++x)
                for (int c = 0; c < 3; ++c) rot.at(y, 39 - x, c) = img.at(x, y, c);
        const double a = metrics::uiqm(img).uiqm;
        const double b = metrics::uiqm(rot).uiqm;
        CHECK(std::abs(a - b) / std::abs(a) < 0.01);
    }

    SUBCASE("degenerate inputs are rejected") {
        const ImagePlane tiny(4, 4, 0.5f);
        CHECK_THROWS_AS(metrics::uiqm(tiny), Error);
    }
}

TEST_CASE("restoration moves uiqm in the right direction") {
    testutil::DetRng rng(15);
    const ImagePlane scene = testutil::smooth_random_image(rng, 40, 40);
    const spectral::ChannelAttenuation p{0.30, 0.09, 0.03};
    const auto t = imaging::transmission(p, 3.0);
    const auto A = imaging::airlight(p, 5.0);
    const ImagePlane degraded = imaging::degrade(scene, t, A);
    const ImagePlane restored = imaging::restore(degraded, t, A, {});
    CHECK(metrics::uiqm(restored).uiqm > metrics::uiqm(degraded).uiqm);
}

TEST_CASE("metric report assembly") {
    testutil::DetRng rng(17);
    const ImagePlane a = testutil::smooth_random_image(rng, 16, 16);
    const auto report = metrics::evaluate_pair(a, a);
    CHECK(report.mse == 0.0);
    CHECK(report.psnr == metrics::kPsnrCap);
    CHECK(report.psnr_capped);
    CHECK(report.ssim == 1.0);
    CHECK(report.uiqm.uiqm == metrics::uiqm(a).uiqm);
}
