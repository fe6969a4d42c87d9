// SPDX-License-Identifier: Apache-2.0
#include "common.hpp"

#include "hydroptic/dataset.hpp"
#include "hydroptic/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <mutex>

namespace hydroptic::cli {

int cmd_restore(const PipelineFlags& flags, const std::string& input,
                const std::string& output, bool panel) {
    namespace fs = std::filesystem;
    const auto params = flags.restore_params();
    std::string site_id;
    const auto p = flags.resolve_attenuation(&site_id);
    const auto files = gather_pngs(input);
    fs::create_directories(output);
    if (panel) fs::create_directories(fs::path(output) / "panels");

    std::mutex io_mu;
    parallel_for(files.size(), resolve_threads(flags.threads), [&](std::size_t i) {
        const fs::path& file = files[i];
        const auto geom = flags.resolve_geometry(file);
        const ImagePlane observed = read_png(file);

        std::vector<std::string> warnings;
        const ImagePlane restored =
            imaging::restore_with_geometry(observed, p, geom, params, &warnings);

        const fs::path out_png = fs::path(output) / file.filename();
        write_png(restored, out_png);

        const nlohmann::json prov{
            {"input", file.string()},
            {"input_sha256", dataset::sha256_file(file)},
            {"site_id", site_id},
            {"p", {{"r", p.r}, {"g", p.g}, {"b", p.b}}},
            {"geometry", {{"distance_m", geom.distance_m}, {"dive_depth_m", geom.dive_depth_m}}},
            {"params",
             {{"t0", params.t0},
              {"keep_lo", params.keep_lo},
              {"keep_hi", params.keep_hi},
              {"rescale", params.rescale}}},
        };
        {
            const fs::path prov_path = out_png.string() + ".provenance.json";
            const fs::path tmp = prov_path.string() + ".tmp";
            std::ofstream f(tmp, std::ios::binary);
            if (!f) throw_io("cannot create " + tmp.string());
            f << prov.dump(2) << "\n";
            f.close();
            fs::rename(tmp, prov_path);
        }

        // Panels live in a subdirectory so the output stays a plain
        // restored-frames directory (evaluate and dataset tooling glob it).
        if (panel)
            write_png(hstack(observed, restored),
                      fs::path(output) / "panels" / file.filename());

        if (!warnings.empty()) {
            std::lock_guard<std::mutex> lock(io_mu);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        }
    });

    std::cout << "restored " << files.size() << " image(s) into " << output << "\n";
    return kExitOk;
}

} // namespace hydroptic::cli
