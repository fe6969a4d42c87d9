// SPDX-License-Identifier: Apache-2.0
//
// End-to-end runs of the command-line binary.
#include "hydroptic/dataset.hpp"
#include "hydroptic/image.hpp"
#include "hydroptic/losses.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace hydroptic;
using testutil::run_cli;
using testutil::TempDir;

namespace {

void write_frames(const std::filesystem::path& dir, int count, testutil::DetRng& rng,
                  int w = 32, int h = 32) {
    std::filesystem::create_directories(dir);
    char name[32];
    for (int i = 0; i < count; ++i) {
        std::snprintf(name, sizeof(name), "frame%03d.png", i);
        write_png(testutil::smooth_random_image(rng, w, h), dir / name);
    }
}

double channel_mean(const ImagePlane& img, int c) {
    double sum = 0.0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) sum += img.at(x, y, c);
    return sum / (img.width() * img.height());
}

} // namespace

TEST_CASE("synthesize with zero attenuation copies the file byte for byte") {
    TempDir tmp("cli-copy");
    testutil::DetRng rng(101);
    write_frames(tmp.path / "in", 1, rng);
    const auto r = run_cli("synthesize --input " + (tmp.path / "in").string() +
                               " --output " + (tmp.path / "out").string() +
                               " --p 0,0,0 --distance 3 --depth 5",
                           tmp);
    CHECK(r.exit_code == 0);
    CHECK(testutil::read_file(tmp.path / "in/frame000.png") ==
          testutil::read_file(tmp.path / "out/frame000.png"));
    CHECK(std::filesystem::exists(tmp.path / "out/frame000.json")); // geometry sidecar
}

TEST_CASE("synthesized distance sweep reddens monotonically downward") {
    TempDir tmp("cli-sweep");
    testutil::DetRng rng(103);
    write_frames(tmp.path / "in", 1, rng);
    double prev = 1e9;
    for (int d = 1; d <= 5; ++d) {
        const auto out = tmp.path / ("out" + std::to_string(d));
        const auto r = run_cli("synthesize --input " + (tmp.path / "in").string() +
                                   " --output " + out.string() +
                                   " --p 0.35,0.08,0.03 --distance " + std::to_string(d) +
                                   " --depth 4",
                               tmp);
        REQUIRE(r.exit_code == 0);
        const double red = channel_mean(read_png(out / "frame000.png"), 0);
        CHECK(red < prev);
        prev = red;
    }
}

TEST_CASE("synthesize then restore recovers the source") {
    TempDir tmp("cli-roundtrip");
    testutil::DetRng rng(105);
    write_frames(tmp.path / "in", 2, rng);
    const std::string site = testutil::fixture("site.json").string();

    auto r = run_cli("synthesize --input " + (tmp.path / "in").string() + " --output " +
                         (tmp.path / "degraded").string() + " --site " + site +
                         " --distance 3 --depth 6",
                     tmp);
    REQUIRE(r.exit_code == 0);

    r = run_cli("restore --input " + (tmp.path / "degraded").string() + " --output " +
                    (tmp.path / "restored").string() + " --site " + site +
                    " --keep-range 0:255 --no-rescale",
                tmp);
    REQUIRE(r.exit_code == 0);

    for (const char* name : {"frame000.png", "frame001.png"}) {
        const auto src = read_png(tmp.path / "in" / name);
        const auto back = read_png(tmp.path / "restored" / name);
        CHECK(oracle::psnr(back, src) >= 40.0);
        CHECK(std::filesystem::exists(tmp.path / "restored" /
                                      (std::string(name) + ".provenance.json")));
    }
}

TEST_CASE("spelling out the default flags changes nothing") {
    TempDir tmp("cli-defaults");
    testutil::DetRng rng(107);
    write_frames(tmp.path / "in", 1, rng);
    std::ofstream(tmp.path / "in/frame000.json")
        << R"({"distance_m": 2.0, "dive_depth_m": 4.0})";
    const std::string site = testutil::fixture("site.json").string();

    auto r = run_cli("restore --input " + (tmp.path / "in/frame000.png").string() +
                         " --output " + (tmp.path / "a").string() + " --site " + site,
                     tmp);
    REQUIRE(r.exit_code == 0);
    r = run_cli("restore --input " + (tmp.path / "in/frame000.png").string() +
                    " --output " + (tmp.path / "b").string() + " --site " + site +
                    " --t0 0.1 --keep-range 13:255",
                tmp);
    REQUIRE(r.exit_code == 0);
    CHECK(testutil::read_file(tmp.path / "a/frame000.png") ==
          testutil::read_file(tmp.path / "b/frame000.png"));
}

TEST_CASE("restore is deterministic across thread counts") {
    TempDir tmp("cli-threads");
    testutil::DetRng rng(109);
    write_frames(tmp.path / "in", 10, rng);
    const std::string site = testutil::fixture("site.json").string();

    std::vector<std::string> digests;
    for (int threads : {1, 4, 8}) {
        const auto out = tmp.path / ("out" + std::to_string(threads));
        // Exercise the env-var default once, the flag otherwise.
        const std::string args = "restore --input " + (tmp.path / "in").string() +
                                 " --output " + out.string() + " --site " + site +
                                 " --distance 2.5 --depth 5";
        const auto r = threads == 4
                           ? run_cli("HYDROPTIC_THREADS=4 " + testutil::cli_path().string() +
                                         " " + args,
                                     tmp, /*raw_command=*/true)
                           : run_cli(args + " --threads " + std::to_string(threads), tmp);
        REQUIRE(r.exit_code == 0);
        std::string digest;
        for (int i = 0; i < 10; ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "frame%03d.png", i);
            digest += dataset::sha256_file(out / name) + "\n";
        }
        digests.push_back(digest);
    }
    CHECK(digests[0] == digests[1]);
    CHECK(digests[0] == digests[2]);
}

TEST_CASE("panel output sits input and result side by side") {
    TempDir tmp("cli-panel");
    testutil::DetRng rng(111);
    write_frames(tmp.path / "in", 1, rng);
    const auto r = run_cli("restore --input " + (tmp.path / "in").string() + " --output " +
                               (tmp.path / "out").string() +
                               " --p 0.3,0.1,0.05 --distance 2 --depth 3 --panel",
                           tmp);
    REQUIRE(r.exit_code == 0);
    const auto panel = read_png(tmp.path / "out/panels/frame000.png");
    CHECK(panel.width() == 32 * 2 + 4);
    CHECK(panel.height() == 32);
}

TEST_CASE("evaluate on identical directories") {
    TempDir tmp("cli-eval");
    testutil::DetRng rng(113);
    write_frames(tmp.path / "a", 3, rng);
    for (int i = 0; i < 3; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame%03d.png", i);
        std::filesystem::create_directories(tmp.path / "b");
        std::filesystem::copy_file(tmp.path / "a" / name, tmp.path / "b" / name);
    }
    const auto csv = tmp.path / "report.csv";
    const auto json_path = tmp.path / "report.json";
    const auto r = run_cli("evaluate --restored " + (tmp.path / "a").string() +
                               " --reference " + (tmp.path / "b").string() + " --csv " +
                               csv.string() + " --json " + json_path.string(),
                           tmp);
    REQUIRE(r.exit_code == 0);

    std::ifstream in(csv);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "filename,mse,psnr,ssim,uicm,uism,uiconm,uiqm");
    int rows = 0;
    bool saw_mean = false;
    while (std::getline(in, line)) {
        ++rows;
        if (line.rfind("MEAN,", 0) == 0) {
            saw_mean = true;
            CHECK(line.find(",0.000000,100.000000,1.000000,") != std::string::npos);
        }
    }
    CHECK(rows == 4); // 3 frames + MEAN
    CHECK(saw_mean);

    nlohmann::json j;
    std::ifstream(json_path) >> j;
    CHECK(j["pairs"].size() == 3);
    CHECK(j["pairs"][0]["psnr_capped"].get<bool>());
    CHECK(j["psnr_aggregate"]["of_mean_mse"].get<double>() == 100.0);
}

TEST_CASE("evaluate rejects unpaired directories naming the stragglers") {
    TempDir tmp("cli-evalbad");
    testutil::DetRng rng(115);
    write_frames(tmp.path / "a", 2, rng);
    write_frames(tmp.path / "b", 1, rng);
    const auto r = run_cli("evaluate --restored " + (tmp.path / "a").string() +
                               " --reference " + (tmp.path / "b").string() + " --csv " +
                               (tmp.path / "x.csv").string(),
                           tmp);
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("frame001.png") != std::string::npos);
    CHECK(!std::filesystem::exists(tmp.path / "x.csv"));
}

TEST_CASE("evaluate at the reference test-set scale") {
    TempDir tmp("cli-eval300");
    testutil::DetRng rng(117);
    std::filesystem::create_directories(tmp.path / "a");
    std::filesystem::create_directories(tmp.path / "b");
    // 300 tiny pairs: restored = mildly perturbed reference
    for (int i = 0; i < 300; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "p%03d.png", i);
        const auto ref = testutil::smooth_random_image(rng, 16, 16);
        ImagePlane cand = ref;
        for (float& v : cand.values())
            v = std::clamp(v + static_cast<float>(rng.range(-0.02, 0.02)), 0.0f, 1.0f);
        write_png(ref, tmp.path / "b" / name);
        write_png(cand, tmp.path / "a" / name);
    }
    const auto csv = tmp.path / "r.csv";
    const auto r = run_cli("evaluate --restored " + (tmp.path / "a").string() +
                               " --reference " + (tmp.path / "b").string() + " --csv " +
                               csv.string(),
                           tmp);
    REQUIRE(r.exit_code == 0);
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line); // header
    int rows = 0;
    double mse_sum = 0.0, mse_mean_row = -1.0;
    while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const double mse_val = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        if (line.rfind("MEAN,", 0) == 0)
            mse_mean_row = mse_val;
        else {
            ++rows;
            mse_sum += mse_val;
        }
    }
    CHECK(rows == 300);
    // The MEAN row is the arithmetic mean of the per-file loop.
    CHECK(mse_mean_row == doctest::Approx(mse_sum / 300.0).epsilon(1e-4));
}

TEST_CASE("losscheck subcommand") {
    TempDir tmp("cli-loss");
    SUBCASE("random self-check passes") {
        const auto r = run_cli("losscheck --random --seed 7", tmp);
        CHECK(r.exit_code == 0);
        CHECK(r.output.find("patchnce-oracle") != std::string::npos);
        CHECK(r.output.find("PASS") != std::string::npos);
        CHECK(r.output.find("FAIL") == std::string::npos);
    }
    SUBCASE("fixture stacks run the oracle comparison") {
        losses::FeatureStack stack;
        losses::FeatureLayer layer;
        layer.locations = 3;
        layer.channels = 4;
        layer.data.resize(12);
        testutil::DetRng rng(119);
        for (double& v : layer.data) v = rng.gaussian();
        stack.layers.push_back(layer);
        losses::save_feature_stack_json(stack, tmp.path / "x.json");
        for (double& v : stack.layers[0].data) v = rng.gaussian();
        losses::save_feature_stack_json(stack, tmp.path / "gx.json");
        const auto r = run_cli("losscheck --features-x " + (tmp.path / "x.json").string() +
                                   " --features-gx " + (tmp.path / "gx.json").string(),
                               tmp);
        CHECK(r.exit_code == 0);
        CHECK(r.output.find("patchnce value") != std::string::npos);
    }
    SUBCASE("corrupted fixture exits 3 and names the layer") {
        std::ofstream(tmp.path / "x.json")
            << R"({"layers":[{"s":3,"c":2,"data":[1,0,0,1,1,1]}]})";
        std::ofstream(tmp.path / "gx.json")
            << R"({"layers":[{"s":2,"c":2,"data":[1,0,0,1]}]})";
        const auto r = run_cli("losscheck --features-x " + (tmp.path / "x.json").string() +
                                   " --features-gx " + (tmp.path / "gx.json").string(),
                               tmp);
        CHECK(r.exit_code == 3);
        CHECK(r.output.find("layer 0") != std::string::npos);
    }
}

TEST_CASE("dataset subcommand end to end") {
    TempDir tmp("cli-dataset");
    testutil::DetRng rng(121);

    // 8 good + 4 low frames with one site (mirrors the library toy builder
    // but driven purely through the CLI surface).
    namespace fs = std::filesystem;
    fs::create_directories(tmp.path / "root/raw");
    fs::create_directories(tmp.path / "root/sites/site-01");
    {
        std::ofstream f(tmp.path / "root/sites/site-01/attenuation.csv");
        f << "wavelength_nm,value\n";
        for (int nm = 400; nm <= 750; nm += 10)
            f << nm << "," << 0.02 + 0.25 / (1.0 + std::exp(-(nm - 610.0) / 25.0)) << "\n";
    }
    auto response = [&](const char* name, double center) {
        std::ofstream f(tmp.path / "root/sites/site-01" / name);
        f << "wavelength_nm,value\n";
        for (int nm = 400; nm <= 750; nm += 10) {
            const double d = (nm - center) / 50.0;
            f << nm << "," << 0.8 * std::exp(-d * d) << "\n";
        }
    };
    response("response_r.csv", 610.0);
    response("response_g.csv", 540.0);
    response("response_b.csv", 465.0);
    std::ofstream(tmp.path / "root/sites/site-01/metadata.json") << R"({
      "site_id": "site-01", "water_type": "oceanic", "camera_model": "CMV2000-QE",
      "max_dive_depth_m": 15.0, "attenuation_csv": "attenuation.csv",
      "sensor_response_csv": {"r": "response_r.csv", "g": "response_g.csv", "b": "response_b.csv"}
    })";
    for (int i = 0; i < 12; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "img%03d", i);
        write_png(testutil::smooth_random_image(rng, 24, 20),
                  tmp.path / "root/raw" / (std::string(name) + ".png"));
        std::ofstream sidecar(tmp.path / "root/raw" / (std::string(name) + ".json"));
        if (i < 8)
            sidecar << R"({"site_id":"site-01","dive_depth_m":5.0,"distance_m":3.0,)"
                    << R"("depth_series":[5.0,5.1,5.0]})";
        else
            sidecar << R"({"site_id":"site-01","dive_depth_m":5.0,"depth_series":[5.0,8.0]})";
    }

    const std::string base_cmd = "dataset --root " + (tmp.path / "root").string() +
                                 " --seed 9 --test-count 3 --expect-size 24x20";
    auto r = run_cli(base_cmd, tmp);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("0 violation(s)") != std::string::npos);

    auto manifest = dataset::read_manifests(tmp.path / "root");
    CHECK(manifest.test.size() == 3);
    CHECK(manifest.paired_train.size() == 5);
    CHECK(manifest.unpaired_low.size() == 4);

    SUBCASE("rerun is byte-identical") {
        const auto before = testutil::read_file(tmp.path / "root/manifests/test.json");
        const auto before_img =
            testutil::read_file(tmp.path / "root" / manifest.test.front().restored);
        r = run_cli(base_cmd, tmp);
        REQUIRE(r.exit_code == 0);
        CHECK(testutil::read_file(tmp.path / "root/manifests/test.json") == before);
        CHECK(testutil::read_file(tmp.path / "root" / manifest.test.front().restored) ==
              before_img);
    }
    SUBCASE("an exclusion removes its pair from every split") {
        const auto excluded_good = manifest.test.front().good;
        std::ofstream(tmp.path / "root/exclusions.txt") << excluded_good << "\n";
        r = run_cli(base_cmd, tmp);
        REQUIRE(r.exit_code == 0);
        const auto m2 = dataset::read_manifests(tmp.path / "root");
        CHECK(m2.test.size() + m2.paired_train.size() == 7);
        for (const auto& pe : m2.test) CHECK(pe.good != excluded_good);
        for (const auto& pe : m2.paired_train) CHECK(pe.good != excluded_good);
    }
}

TEST_CASE("exit codes") {
    TempDir tmp("cli-exit");
    SUBCASE("unknown flag is a usage error") {
        const auto r = run_cli("restore --frobnicate", tmp);
        CHECK(r.exit_code == 2);
    }
    SUBCASE("missing input is an I/O error") {
        const auto r = run_cli("restore --input " + (tmp.path / "nope").string() +
                                   " --output " + (tmp.path / "out").string() +
                                   " --p 0.1,0.1,0.1 --distance 2 --depth 3",
                               tmp);
        CHECK(r.exit_code == 1);
    }
    SUBCASE("contradictory flags are a config error") {
        testutil::DetRng rng(123);
        write_frames(tmp.path / "in", 1, rng);
        const auto r = run_cli("restore --input " + (tmp.path / "in").string() +
                                   " --output " + (tmp.path / "out").string() +
                                   " --p 0.1,0.1,0.1 --site somewhere.json --distance 2 " +
                                   "--depth 3",
                               tmp);
        CHECK(r.exit_code == 2);
    }
    SUBCASE("bad keep-range grammar is a config error") {
        testutil::DetRng rng(125);
        write_frames(tmp.path / "in", 1, rng);
        const auto r = run_cli("restore --input " + (tmp.path / "in").string() +
                                   " --output " + (tmp.path / "out").string() +
                                   " --p 0.1,0.1,0.1 --distance 2 --depth 3 " +
                                   "--keep-range 13-255",
                               tmp);
        CHECK(r.exit_code == 2);
    }
}
