// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hydroptic/imaging.hpp"
#include "hydroptic/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hydroptic::dataset {

enum class Quality { Low, Good, Restored };

std::string to_string(Quality q);

/// One frame of the collection. Paths are stored relative to the dataset
/// root, forward-slashed, so manifests are portable and reruns are
/// byte-identical.
struct ImageRecord {
    std::string path;
    std::string site_id;
    double dive_depth_m = 0.0;
    std::optional<double> distance_m;     // absent for low-quality frames
    std::vector<double> depth_series;     // per-frame depth readings
    std::optional<Quality> quality;       // pre-assigned or labeled
    std::string source;                   // Restored only: the good-quality origin
};

/// Per-site water column and camera description; curve paths are resolved
/// relative to the metadata file.
struct SiteMetadata {
    std::string site_id;
    std::string water_type;
    std::string camera_model;
    double max_dive_depth_m = 0.0;
    std::filesystem::path attenuation_csv;
    std::array<std::filesystem::path, 3> sensor_response_csv; // r, g, b
};

SiteMetadata load_site_metadata(const std::filesystem::path& path);

/// Integrate the site's attenuation spectrum against its sensor responses.
spectral::ChannelAttenuation site_attenuation(const SiteMetadata& site);

struct LabelThresholds {
    /// Largest tolerated jump between consecutive depth readings for a frame
    /// to count as shot at roughly constant depth.
    double depth_jitter_max_m = 0.5;
};

/// Good when the depth series never jumps more than the threshold and a
/// distance was assigned; a pre-assigned quality passes through unchanged.
Quality label_quality(const ImageRecord& record, const LabelThresholds& thresholds = {});

struct RestoreOutcome {
    std::vector<ImageRecord> restored;
    std::vector<std::string> failures; // skipped records, with reasons
    std::vector<std::string> warnings;
};

/// Restore every good-quality record through the spectral+imaging pipeline.
/// Outputs land in <root>/restored/ next to a provenance sidecar capturing
/// the exact inversion inputs. Failures are skipped and reported, not fatal.
RestoreOutcome restore_batch(const std::vector<ImageRecord>& records,
                             const std::map<std::string, SiteMetadata>& sites,
                             const imaging::RestoreParams& params,
                             const std::filesystem::path& root, int threads = 1);

struct PairEntry {
    std::string good;
    std::string restored;
};

struct SplitManifest {
    std::uint64_t seed = 0;
    int test_count = 0;
    std::vector<std::string> unpaired_low;
    std::vector<std::string> unpaired_restored;
    std::vector<PairEntry> paired_train;
    std::vector<PairEntry> test;
};

/// Deterministic split construction: good/restored pairs are shuffled with a
/// seeded Fisher-Yates over mt19937_64, the first test_count become the test
/// set, the rest the paired training set; low-quality frames plus the
/// non-test restored frames form the unpaired training set. Excluded paths
/// drop the whole pair.
SplitManifest build_splits(const std::vector<ImageRecord>& records, int test_count,
                           std::uint64_t seed,
                           const std::set<std::string>& exclusions = {});

/// Identifier recorded in every manifest header.
inline constexpr const char* kSplitPrng = "mt19937_64+fisher-yates";

void write_manifests(const SplitManifest& manifest, const std::filesystem::path& root);
SplitManifest read_manifests(const std::filesystem::path& root);

struct ValidationIssue {
    enum class Severity { Violation, Warning };
    Severity severity;
    std::string kind; // duplicate-path, missing-file, dimension-mismatch, unexpected-resolution
    std::string detail;
};

struct ValidationOptions {
    /// When set, frames deviating from this resolution are flagged as
    /// warnings (the reference collection is 1842x980).
    std::optional<std::pair<int, int>> expected_resolution;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    std::size_t violation_count() const;
    std::size_t warning_count() const;
};

/// Machine-readable invariant check: split disjointness, file existence,
/// pairwise dimension agreement, and (optionally) the expected native
/// resolution. Violations are data, not exceptions.
ValidationReport validate_manifest(const SplitManifest& manifest,
                                   const std::filesystem::path& root,
                                   const ValidationOptions& opts = {});

/// One relative path per line; blank lines and #-comments ignored.
std::set<std::string> load_exclusions(const std::filesystem::path& path);

/// Scan <root>/raw/*.png with their JSON sidecars into records (sorted by
/// path).
std::vector<ImageRecord> scan_records(const std::filesystem::path& root);

/// Hex SHA-256 of a file's bytes, as recorded in provenance sidecars.
std::string sha256_file(const std::filesystem::path& path);

} // namespace hydroptic::dataset
