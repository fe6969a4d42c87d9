// SPDX-License-Identifier: Apache-2.0
#include "common.hpp"

#include "hydroptic/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>

namespace hydroptic::cli {

int cmd_synthesize(const PipelineFlags& flags, const std::string& input,
                   const std::string& output) {
    namespace fs = std::filesystem;
    if (!(flags.distance > 0.0) || flags.depth < 0.0)
        throw_parse("synthesize requires --distance > 0 and --depth >= 0");

    const auto p = flags.resolve_attenuation();
    const auto t = imaging::transmission(p, flags.distance);
    const auto A = imaging::airlight(p, flags.depth);
    const auto files = gather_pngs(input);
    fs::create_directories(output);

    parallel_for(files.size(), resolve_threads(flags.threads), [&](std::size_t i) {
        const fs::path& file = files[i];
        const ImagePlane scene = read_png(file);
        const ImagePlane degraded = imaging::degrade(scene, t, A);
        const fs::path out_png = fs::path(output) / file.filename();
        write_png(degraded, out_png);

        // Geometry sidecar so the frame can be inverted later.
        fs::path sidecar = out_png;
        sidecar.replace_extension(".json");
        const fs::path tmp = sidecar.string() + ".tmp";
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw_io("cannot create " + tmp.string());
        f << nlohmann::json{{"distance_m", flags.distance}, {"dive_depth_m", flags.depth}}
                 .dump(2)
          << "\n";
        f.close();
        fs::rename(tmp, sidecar);
    });

    std::cout << "synthesized " << files.size() << " image(s) into " << output << "\n";
    return kExitOk;
}

} // namespace hydroptic::cli
