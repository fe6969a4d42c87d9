// SPDX-License-Identifier: Apache-2.0
#include "common.hpp"

#include "hydroptic/error.hpp"
#include "hydroptic/metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

namespace hydroptic::cli {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

int cmd_evaluate(const std::string& restored_dir, const std::string& reference_dir,
                 const std::string& csv_path, const std::string& json_path,
                 bool ssim_gray, int threads) {
    namespace fs = std::filesystem;

    std::set<std::string> restored_names, reference_names;
    for (const auto& f : gather_pngs(restored_dir))
        restored_names.insert(f.filename().string());
    for (const auto& f : gather_pngs(reference_dir))
        reference_names.insert(f.filename().string());

    std::vector<std::string> unmatched;
    for (const auto& n : restored_names)
        if (!reference_names.count(n)) unmatched.push_back(n + " (no reference)");
    for (const auto& n : reference_names)
        if (!restored_names.count(n)) unmatched.push_back(n + " (no restored)");
    if (!unmatched.empty()) {
        std::string msg = "unmatched filenames between directories:";
        for (const auto& u : unmatched) msg += "\n  " + u;
        throw_invariant(msg);
    }

    const std::vector<std::string> names(restored_names.begin(), restored_names.end());
    const metrics::SsimOptions ssim_opts{ssim_gray};
    std::vector<metrics::MetricReport> reports(names.size());
    // Pairs in parallel; aggregation stays single-threaded in name order.
    parallel_for(names.size(), resolve_threads(threads), [&](std::size_t i) {
        const ImagePlane cand = read_png(fs::path(restored_dir) / names[i]);
        const ImagePlane ref = read_png(fs::path(reference_dir) / names[i]);
        reports[i] = metrics::evaluate_pair(cand, ref, ssim_opts);
    });

    metrics::MetricReport mean{};
    for (const auto& r : reports) {
        mean.mse += r.mse;
        mean.psnr += r.psnr;
        mean.ssim += r.ssim;
        mean.uiqm.uicm += r.uiqm.uicm;
        mean.uiqm.uism += r.uiqm.uism;
        mean.uiqm.uiconm += r.uiqm.uiconm;
        mean.uiqm.uiqm += r.uiqm.uiqm;
    }
    const auto n = static_cast<double>(reports.size());
    mean.mse /= n;
    mean.psnr /= n;
    mean.ssim /= n;
    mean.uiqm.uicm /= n;
    mean.uiqm.uism /= n;
    mean.uiqm.uiconm /= n;
    mean.uiqm.uiqm /= n;
    // Second aggregation convention: PSNR of the pooled MSE rather than the
    // mean of per-image PSNRs.
    const double psnr_of_mean_mse =
        mean.mse <= 0.0 ? metrics::kPsnrCap
                        : std::min(metrics::kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mean.mse));

    auto row_csv = [](const std::string& name, double mse, double psnr, double ssim,
                      const metrics::UiqmBreakdown& u) {
        return name + "," + fmt(mse) + "," + fmt(psnr) + "," + fmt(ssim) + "," +
               fmt(u.uicm) + "," + fmt(u.uism) + "," + fmt(u.uiconm) + "," + fmt(u.uiqm);
    };

    std::string csv = "filename,mse,psnr,ssim,uicm,uism,uiconm,uiqm\n";
    for (std::size_t i = 0; i < names.size(); ++i)
        csv += row_csv(names[i], reports[i].mse, reports[i].psnr, reports[i].ssim,
                       reports[i].uiqm) +
               "\n";
    csv += row_csv("MEAN", mean.mse, mean.psnr, mean.ssim, mean.uiqm) + "\n";
    {
        const fs::path tmp = csv_path + ".tmp";
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw_io("cannot create " + tmp.string());
        f << csv;
        f.close();
        fs::rename(tmp, csv_path);
    }

    if (!json_path.empty()) {
        nlohmann::json per_image = nlohmann::json::array();
        for (std::size_t i = 0; i < names.size(); ++i) {
            const auto& r = reports[i];
            per_image.push_back({{"filename", names[i]},
                                 {"mse", r.mse},
                                 {"psnr", r.psnr},
                                 {"psnr_capped", r.psnr_capped},
                                 {"ssim", r.ssim},
                                 {"uicm", r.uiqm.uicm},
                                 {"uism", r.uiqm.uism},
                                 {"uiconm", r.uiqm.uiconm},
                                 {"uiqm", r.uiqm.uiqm}});
        }
        const nlohmann::json summary{
            {"pairs", per_image},
            {"mean",
             {{"mse", mean.mse},
              {"psnr", mean.psnr},
              {"ssim", mean.ssim},
              {"uicm", mean.uiqm.uicm},
              {"uism", mean.uiqm.uism},
              {"uiconm", mean.uiqm.uiconm},
              {"uiqm", mean.uiqm.uiqm}}},
            {"psnr_aggregate",
             {{"mean_of_images", mean.psnr}, {"of_mean_mse", psnr_of_mean_mse}}},
            {"ssim_mode", ssim_gray ? "luma" : "rgb-average"},
        };
        const fs::path tmp = json_path + ".tmp";
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw_io("cannot create " + tmp.string());
        f << summary.dump(2) << "\n";
        f.close();
        fs::rename(tmp, json_path);
    }

    std::cout << "evaluated " << names.size() << " pair(s): mean MSE " << fmt(mean.mse)
              << ", PSNR " << fmt(mean.psnr) << ", SSIM " << fmt(mean.ssim) << ", UIQM "
              << fmt(mean.uiqm.uiqm) << "\n";
    return kExitOk;
}

} // namespace hydroptic::cli
