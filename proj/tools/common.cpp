// SPDX-License-Identifier: Apache-2.0
#include "common.hpp"

#include "hydroptic/dataset.hpp"
#include "hydroptic/error.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

namespace hydroptic::cli {

std::pair<int, int> parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw_parse("expected lo:hi, got '" + text + "'");
    try {
        std::size_t used = 0;
        const int lo = std::stoi(text.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(text);
        const std::string hi_text = text.substr(colon + 1);
        const int hi = std::stoi(hi_text, &used);
        if (used != hi_text.size()) throw std::invalid_argument(text);
        return {lo, hi};
    } catch (const std::exception&) {
        throw_parse("expected lo:hi, got '" + text + "'");
    }
}

imaging::ChannelTriple parse_triple(const std::string& text) {
    std::istringstream ss(text);
    imaging::ChannelTriple t;
    char c1 = 0, c2 = 0;
    if (!(ss >> t.r >> c1 >> t.g >> c2 >> t.b) || c1 != ',' || c2 != ',' ||
        !ss.eof())
        throw_parse("expected r,g,b, got '" + text + "'");
    return t;
}

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("HYDROPTIC_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<std::filesystem::path> gather_pngs(const std::filesystem::path& input) {
    namespace fs = std::filesystem;
    if (fs::is_regular_file(input)) return {input};
    if (!fs::is_directory(input))
        throw_io(input.string() + " is neither a file nor a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(input))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw_io("no .png files in " + input.string());
    return files;
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn) {
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    if (n == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::vector<std::pair<std::string, ErrorKind>> errors;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (const Error& e) {
                    std::lock_guard<std::mutex> lock(mu);
                    errors.emplace_back(e.what(), e.kind());
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(mu);
                    errors.emplace_back(e.what(), ErrorKind::Io);
                }
            }
        });
    for (auto& th : pool) th.join();
    if (!errors.empty()) {
        std::sort(errors.begin(), errors.end());
        std::string msg = errors.front().first;
        for (std::size_t i = 1; i < errors.size(); ++i) msg += "\n" + errors[i].first;
        throw Error(errors.front().second, msg);
    }
}

imaging::RestoreParams PipelineFlags::restore_params() const {
    imaging::RestoreParams p;
    p.t0 = t0;
    std::tie(p.keep_lo, p.keep_hi) = parse_range(keep_range);
    p.rescale = !no_rescale;
    p.validate();
    return p;
}

spectral::ChannelAttenuation
PipelineFlags::resolve_attenuation(std::string* site_id_out) const {
    if (!p_triple.empty()) {
        if (!site_path.empty())
            throw_parse("--site and --p are mutually exclusive");
        const auto t = parse_triple(p_triple);
        if (site_id_out) *site_id_out = "(direct)";
        return {t.r, t.g, t.b};
    }
    if (site_path.empty())
        throw_parse("either --site or --p is required");
    const auto site = dataset::load_site_metadata(site_path);
    if (site_id_out) *site_id_out = site.site_id;
    return dataset::site_attenuation(site);
}

imaging::SceneGeometry
PipelineFlags::resolve_geometry(const std::filesystem::path& image_path) const {
    const bool has_distance = distance > 0.0;
    const bool has_depth = depth >= 0.0;
    if (has_distance != has_depth)
        throw_parse("--distance and --depth must be given together");
    if (has_distance) return {distance, depth};

    auto sidecar = image_path;
    sidecar.replace_extension(".json");
    if (!std::filesystem::exists(sidecar))
        throw_io(image_path.string() + ": no geometry sidecar " + sidecar.string() +
                 " and no --distance/--depth override");
    return imaging::load_geometry_json(sidecar);
}

} // namespace hydroptic::cli
