// SPDX-License-Identifier: Apache-2.0
#include "common.hpp"

#include "hydroptic/dataset.hpp"
#include "hydroptic/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>

namespace hydroptic::cli {

int cmd_dataset(const DatasetFlags& flags) {
    namespace fs = std::filesystem;
    namespace ds = hydroptic::dataset;
    const fs::path root(flags.root);

    // Sites
    std::map<std::string, ds::SiteMetadata> sites;
    const fs::path sites_dir = root / "sites";
    if (fs::is_directory(sites_dir))
        for (const auto& entry : fs::directory_iterator(sites_dir))
            if (entry.is_directory() && fs::exists(entry.path() / "metadata.json")) {
                auto site = ds::load_site_metadata(entry.path() / "metadata.json");
                sites.emplace(site.site_id, std::move(site));
            }
    if (sites.empty()) throw_io("no site metadata under " + sites_dir.string());

    // Records + labeling
    std::vector<ds::ImageRecord> records = ds::scan_records(root);
    const ds::LabelThresholds thresholds{flags.depth_jitter_max};
    std::size_t good = 0, low = 0;
    for (auto& rec : records) {
        rec.quality = ds::label_quality(rec, thresholds);
        (*rec.quality == ds::Quality::Good ? good : low) += 1;
    }

    // Batch restoration
    const auto params = flags.pipeline.restore_params();
    const auto outcome = ds::restore_batch(records, sites, params, root,
                                           resolve_threads(flags.pipeline.threads));
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& f : outcome.failures) std::cerr << "skipped: " << f << "\n";
    records.insert(records.end(), outcome.restored.begin(), outcome.restored.end());

    // Splits
    std::set<std::string> exclusions;
    if (fs::exists(root / "exclusions.txt"))
        exclusions = ds::load_exclusions(root / "exclusions.txt");
    const auto manifest = ds::build_splits(records, flags.test_count, flags.seed, exclusions);
    ds::write_manifests(manifest, root);

    // Validation
    ds::ValidationOptions vopts;
    if (!flags.expect_size.empty()) {
        const auto x = flags.expect_size.find('x');
        try {
            if (x == std::string::npos) throw std::invalid_argument(flags.expect_size);
            vopts.expected_resolution = {{std::stoi(flags.expect_size.substr(0, x)),
                                          std::stoi(flags.expect_size.substr(x + 1))}};
        } catch (const std::exception&) {
            throw_parse("--expect-size wants WxH, got '" + flags.expect_size + "'");
        }
    }
    const auto report = ds::validate_manifest(manifest, root, vopts);

    nlohmann::json issues = nlohmann::json::array();
    for (const auto& issue : report.issues)
        issues.push_back(
            {{"severity",
              issue.severity == ds::ValidationIssue::Severity::Violation ? "violation"
                                                                         : "warning"},
             {"kind", issue.kind},
             {"detail", issue.detail}});
    {
        const fs::path path = root / "manifests" / "validation.json";
        const fs::path tmp = path.string() + ".tmp";
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw_io("cannot create " + tmp.string());
        f << nlohmann::json{{"issues", issues},
                            {"violations", report.violation_count()},
                            {"warnings", report.warning_count()}}
                 .dump(2)
          << "\n";
        f.close();
        fs::rename(tmp, path);
    }

    std::cout << "labeled " << good << " good / " << low << " low; restored "
              << outcome.restored.size() << "; splits: " << manifest.test.size()
              << " test pairs, " << manifest.paired_train.size() << " paired-train pairs, "
              << manifest.unpaired_low.size() << "+" << manifest.unpaired_restored.size()
              << " unpaired; validation: " << report.violation_count() << " violation(s), "
              << report.warning_count() << " warning(s)\n";
    for (const auto& issue : report.issues)
        if (issue.severity == ds::ValidationIssue::Severity::Violation)
            std::cerr << "violation: " << issue.kind << ": " << issue.detail << "\n";

    return report.violation_count() == 0 ? kExitOk : kExitInvariant;
}

} // namespace hydroptic::cli
