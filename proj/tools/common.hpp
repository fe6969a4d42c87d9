// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hydroptic/imaging.hpp"
#include "hydroptic/losses.hpp"
#include "hydroptic/spectral.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hydroptic::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitInvariant = 3;

/// "lo:hi" -> integer pair. Throws a parse error on anything else.
std::pair<int, int> parse_range(const std::string& text);

/// "r,g,b" -> triple of doubles.
imaging::ChannelTriple parse_triple(const std::string& text);

/// Thread count: explicit flag > HYDROPTIC_THREADS > hardware concurrency.
int resolve_threads(int flag_value);

/// All *.png directly inside `input` (sorted), or just `input` itself if it
/// is a file.
std::vector<std::filesystem::path> gather_pngs(const std::filesystem::path& input);

/// Work-queue parallel map over an index range; exceptions are captured per
/// item and rethrown as a combined invariant error after the queue drains.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn);

/// Shared flags for commands that run the imaging pipeline.
struct PipelineFlags {
    std::string site_path;         // site metadata JSON
    std::string p_triple;          // direct channel attenuation override
    double distance = 0.0;         // 0 means "use per-image sidecar"
    double depth = -1.0;           // <0 means "use per-image sidecar"
    double t0 = 0.1;
    std::string keep_range = "13:255";
    bool no_rescale = false;
    int threads = 0;

    imaging::RestoreParams restore_params() const;
    /// Attenuation from --p or from the site metadata; exactly one required.
    spectral::ChannelAttenuation resolve_attenuation(std::string* site_id_out = nullptr) const;
    /// Geometry: global flags if given, else the image's JSON sidecar.
    imaging::SceneGeometry resolve_geometry(const std::filesystem::path& image_path) const;
};

int cmd_restore(const PipelineFlags& flags, const std::string& input,
                const std::string& output, bool panel);
int cmd_synthesize(const PipelineFlags& flags, const std::string& input,
                   const std::string& output);
int cmd_evaluate(const std::string& restored_dir, const std::string& reference_dir,
                 const std::string& csv_path, const std::string& json_path,
                 bool ssim_gray, int threads);
int cmd_losscheck(bool random, std::uint64_t seed, int trials, double tau,
                  const std::string& features_x, const std::string& features_gx);

struct DatasetFlags {
    std::string root;
    std::uint64_t seed = 0;
    int test_count = 300;
    double depth_jitter_max = 0.5;
    std::string expect_size; // "WxH", empty disables the resolution warning
    PipelineFlags pipeline;
};

int cmd_dataset(const DatasetFlags& flags);

} // namespace hydroptic::cli
