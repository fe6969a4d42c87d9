// SPDX-License-Identifier: Apache-2.0
#include "hydroptic/dataset.hpp"

#include "hydroptic/error.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace hydroptic::dataset {

using nlohmann::json;

std::string to_string(Quality q) {
    switch (q) {
        case Quality::Low: return "low";
        case Quality::Good: return "good";
        case Quality::Restored: return "restored";
    }
    return "?";
}

namespace {

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open " + path.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw_parse(path.string() + ": " + e.what());
    }
}

void write_text_atomic(const std::string& text, const std::filesystem::path& path) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw_io("cannot create " + tmp.string());
        out << text;
        if (!out) throw_io("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw_io("cannot move " + tmp.string() + " to " + path.string());
}

} // namespace

SiteMetadata load_site_metadata(const std::filesystem::path& path) {
    const json j = read_json_file(path);
    const auto dir = path.parent_path();
    SiteMetadata site;
    try {
        site.site_id = j.at("site_id").get<std::string>();
        site.water_type = j.at("water_type").get<std::string>();
        site.camera_model = j.at("camera_model").get<std::string>();
        site.max_dive_depth_m = j.at("max_dive_depth_m").get<double>();
        site.attenuation_csv = dir / j.at("attenuation_csv").get<std::string>();
        const auto& resp = j.at("sensor_response_csv");
        site.sensor_response_csv = {dir / resp.at("r").get<std::string>(),
                                    dir / resp.at("g").get<std::string>(),
                                    dir / resp.at("b").get<std::string>()};
    } catch (const json::exception& e) {
        throw_parse(path.string() + ": " + e.what());
    }
    return site;
}

spectral::ChannelAttenuation site_attenuation(const SiteMetadata& site) {
    using spectral::CurveKind;
    const auto beta = spectral::load_spectral_csv(site.attenuation_csv, CurveKind::Attenuation);
    spectral::SensorResponses responses{
        spectral::load_spectral_csv(site.sensor_response_csv[0], CurveKind::SensorResponse),
        spectral::load_spectral_csv(site.sensor_response_csv[1], CurveKind::SensorResponse),
        spectral::load_spectral_csv(site.sensor_response_csv[2], CurveKind::SensorResponse)};
    return spectral::channel_attenuations(beta, responses);
}

Quality label_quality(const ImageRecord& record, const LabelThresholds& thresholds) {
    if (record.quality) return *record.quality;
    if (record.depth_series.empty())
        throw_invariant(record.path + ": no depth series and no pre-assigned quality");

    double max_jump = 0.0;
    for (std::size_t i = 1; i < record.depth_series.size(); ++i)
        max_jump = std::max(max_jump, std::abs(record.depth_series[i] -
                                               record.depth_series[i - 1]));
    const bool steady = max_jump <= thresholds.depth_jitter_max_m;
    const bool has_distance = record.distance_m && *record.distance_m > 0.0;
    return (steady && has_distance) ? Quality::Good : Quality::Low;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open " + path.string());

    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw_io("sha256 init failed");
    }
    char buf[1 << 16];
    while (in.good()) {
        in.read(buf, sizeof(buf));
        const auto got = in.gcount();
        if (got > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(got));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

namespace {

std::string restored_path_for(const std::string& good_path) {
    const std::filesystem::path p(good_path);
    return "restored/" + p.filename().string();
}

json provenance_json(const ImageRecord& rec, const spectral::ChannelAttenuation& p,
                     const imaging::ChannelTriple& t, const imaging::ChannelTriple& A,
                     const imaging::RestoreParams& params, const std::string& input_hash) {
    return json{
        {"input", rec.path},
        {"input_sha256", input_hash},
        {"site_id", rec.site_id},
        {"p", {{"r", p.r}, {"g", p.g}, {"b", p.b}}},
        {"t", {{"r", t.r}, {"g", t.g}, {"b", t.b}}},
        {"A", {{"r", A.r}, {"g", A.g}, {"b", A.b}}},
        {"geometry", {{"distance_m", *rec.distance_m}, {"dive_depth_m", rec.dive_depth_m}}},
        {"params",
         {{"t0", params.t0},
          {"keep_lo", params.keep_lo},
          {"keep_hi", params.keep_hi},
          {"rescale", params.rescale}}},
    };
}

} // namespace

RestoreOutcome restore_batch(const std::vector<ImageRecord>& records,
                             const std::map<std::string, SiteMetadata>& sites,
                             const imaging::RestoreParams& params,
                             const std::filesystem::path& root, int threads) {
    params.validate();
    std::filesystem::create_directories(root / "restored");

    // Integrate each referenced site once, up front.
    std::map<std::string, spectral::ChannelAttenuation> attenuation;
    RestoreOutcome outcome;
    std::vector<const ImageRecord*> work;
    for (const auto& rec : records) {
        if (!rec.quality || *rec.quality != Quality::Good) continue;
        if (!rec.distance_m || *rec.distance_m <= 0.0) {
            outcome.failures.push_back(rec.path +
                                       ": good-quality record lacks a positive distance");
            continue;
        }
        if (!attenuation.count(rec.site_id)) {
            auto it = sites.find(rec.site_id);
            if (it == sites.end()) {
                outcome.failures.push_back(rec.path + ": unknown site '" + rec.site_id + "'");
                continue;
            }
            try {
                attenuation.emplace(rec.site_id, site_attenuation(it->second));
            } catch (const Error& e) {
                outcome.failures.push_back(rec.path + ": " + e.what());
                continue;
            }
        }
        work.push_back(&rec);
    }

    struct Slot {
        std::optional<ImageRecord> restored;
        std::vector<std::string> failures;
        std::vector<std::string> warnings;
    };
    std::vector<Slot> slots(work.size());
    std::atomic<std::size_t> next{0};

    auto run_one = [&](std::size_t idx) {
        const ImageRecord& rec = *work[idx];
        Slot& slot = slots[idx];
        try {
            const auto& p = attenuation.at(rec.site_id);
            const imaging::SceneGeometry geom{*rec.distance_m, rec.dive_depth_m};
            const ImagePlane observed = read_png(root / rec.path);

            std::vector<std::string> warnings;
            const ImagePlane restored =
                imaging::restore_with_geometry(observed, p, geom, params, &warnings);
            for (auto& w : warnings) slot.warnings.push_back(rec.path + ": " + w);

            const std::string out_rel = restored_path_for(rec.path);
            write_png(restored, root / out_rel);

            const auto t = imaging::transmission(p, geom.distance_m);
            const auto A = imaging::airlight(p, geom.dive_depth_m);
            const json prov = provenance_json(rec, p, t, A, params, sha256_file(root / rec.path));
            write_text_atomic(prov.dump(2) + "\n",
                              root / (out_rel + ".provenance.json"));

            ImageRecord out = rec;
            out.path = out_rel;
            out.quality = Quality::Restored;
            out.source = rec.path;
            slot.restored = std::move(out);
        } catch (const std::exception& e) {
            slot.failures.push_back(rec.path + ": " + e.what());
        }
    };

    const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(work.size())));
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < work.size(); ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nthreads));
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < work.size();
                     i = next.fetch_add(1))
                    run_one(i);
            });
        for (auto& th : pool) th.join();
    }

    // Aggregate in input order so results are independent of scheduling.
    for (auto& slot : slots) {
        if (slot.restored) outcome.restored.push_back(std::move(*slot.restored));
        for (auto& f : slot.failures) outcome.failures.push_back(std::move(f));
        for (auto& w : slot.warnings) outcome.warnings.push_back(std::move(w));
    }
    return outcome;
}

SplitManifest build_splits(const std::vector<ImageRecord>& records, int test_count,
                           std::uint64_t seed, const std::set<std::string>& exclusions) {
    if (test_count < 0) throw_invariant("build_splits: negative test count");

    std::map<std::string, const ImageRecord*> goods;
    std::vector<const ImageRecord*> restored;
    std::vector<std::string> lows;
    for (const auto& rec : records) {
        if (!rec.quality) throw_invariant(rec.path + ": unlabeled record");
        switch (*rec.quality) {
            case Quality::Good: goods.emplace(rec.path, &rec); break;
            case Quality::Restored: restored.push_back(&rec); break;
            case Quality::Low:
                if (!exclusions.count(rec.path)) lows.push_back(rec.path);
                break;
        }
    }

    std::vector<PairEntry> pairs;
    std::set<std::string> paired_goods;
    for (const auto* rec : restored) {
        if (rec->source.empty() || !goods.count(rec->source))
            throw_invariant(rec->path + ": restored record lacks a good-quality source");
        if (!paired_goods.insert(rec->source).second)
            throw_invariant(rec->source + ": referenced by more than one restored record");
        if (exclusions.count(rec->path) || exclusions.count(rec->source)) continue;
        pairs.push_back({rec->source, rec->path});
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const PairEntry& a, const PairEntry& b) { return a.good < b.good; });
    std::sort(lows.begin(), lows.end());

    if (static_cast<std::size_t>(test_count) > pairs.size())
        throw_invariant("build_splits: requested " + std::to_string(test_count) +
                        " test pairs but only " + std::to_string(pairs.size()) +
                        " are available");

    // Fisher-Yates with explicit rejection sampling; std::shuffle and the
    // distribution classes are not pinned across standard libraries.
    std::mt19937_64 rng(seed);
    auto bounded = [&rng](std::uint64_t n) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x = rng();
        while (x >= limit) x = rng();
        return x % n;
    };
    for (std::size_t i = pairs.size(); i > 1; --i)
        std::swap(pairs[i - 1], pairs[bounded(i)]);

    SplitManifest manifest;
    manifest.seed = seed;
    manifest.test_count = test_count;
    manifest.test.assign(pairs.begin(), pairs.begin() + test_count);
    manifest.paired_train.assign(pairs.begin() + test_count, pairs.end());
    auto by_good = [](const PairEntry& a, const PairEntry& b) { return a.good < b.good; };
    std::sort(manifest.test.begin(), manifest.test.end(), by_good);
    std::sort(manifest.paired_train.begin(), manifest.paired_train.end(), by_good);

    manifest.unpaired_low = std::move(lows);
    for (const auto& pe : manifest.paired_train)
        manifest.unpaired_restored.push_back(pe.restored);
    std::sort(manifest.unpaired_restored.begin(), manifest.unpaired_restored.end());
    return manifest;
}

namespace {

json manifest_header(const SplitManifest& m, const char* kind) {
    return json{{"kind", kind},
                {"seed", m.seed},
                {"prng", kSplitPrng},
                {"test_count", m.test_count}};
}

json pairs_to_json(const std::vector<PairEntry>& pairs) {
    json arr = json::array();
    for (const auto& p : pairs) arr.push_back({{"good", p.good}, {"restored", p.restored}});
    return arr;
}

std::vector<PairEntry> pairs_from_json(const json& arr, const std::filesystem::path& src) {
    std::vector<PairEntry> out;
    try {
        for (const auto& e : arr)
            out.push_back({e.at("good").get<std::string>(),
                           e.at("restored").get<std::string>()});
    } catch (const json::exception& e) {
        throw_parse(src.string() + ": " + e.what());
    }
    return out;
}

} // namespace

void write_manifests(const SplitManifest& manifest, const std::filesystem::path& root) {
    const auto dir = root / "manifests";
    std::filesystem::create_directories(dir);

    json unpaired = manifest_header(manifest, "unpaired_train");
    unpaired["low"] = manifest.unpaired_low;
    unpaired["restored"] = manifest.unpaired_restored;
    write_text_atomic(unpaired.dump(2) + "\n", dir / "unpaired_train.json");

    json paired = manifest_header(manifest, "paired_train");
    paired["pairs"] = pairs_to_json(manifest.paired_train);
    write_text_atomic(paired.dump(2) + "\n", dir / "paired_train.json");

    json test = manifest_header(manifest, "test");
    test["pairs"] = pairs_to_json(manifest.test);
    write_text_atomic(test.dump(2) + "\n", dir / "test.json");
}

SplitManifest read_manifests(const std::filesystem::path& root) {
    const auto dir = root / "manifests";
    SplitManifest m;
    const json unpaired = read_json_file(dir / "unpaired_train.json");
    const json paired = read_json_file(dir / "paired_train.json");
    const json test = read_json_file(dir / "test.json");
    try {
        m.seed = unpaired.at("seed").get<std::uint64_t>();
        m.test_count = unpaired.at("test_count").get<int>();
        m.unpaired_low = unpaired.at("low").get<std::vector<std::string>>();
        m.unpaired_restored = unpaired.at("restored").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw_parse((dir / "unpaired_train.json").string() + ": " + e.what());
    }
    m.paired_train = pairs_from_json(paired.at("pairs"), dir / "paired_train.json");
    m.test = pairs_from_json(test.at("pairs"), dir / "test.json");
    return m;
}

std::size_t ValidationReport::violation_count() const {
    return static_cast<std::size_t>(
        std::count_if(issues.begin(), issues.end(), [](const ValidationIssue& i) {
            return i.severity == ValidationIssue::Severity::Violation;
        }));
}

std::size_t ValidationReport::warning_count() const {
    return issues.size() - violation_count();
}

ValidationReport validate_manifest(const SplitManifest& manifest,
                                   const std::filesystem::path& root,
                                   const ValidationOptions& opts) {
    ValidationReport report;
    auto violation = [&](const std::string& kind, const std::string& detail) {
        report.issues.push_back({ValidationIssue::Severity::Violation, kind, detail});
    };
    auto warning = [&](const std::string& kind, const std::string& detail) {
        report.issues.push_back({ValidationIssue::Severity::Warning, kind, detail});
    };

    struct Membership {
        std::string split;
        bool is_test;
    };
    std::map<std::string, Membership> seen;
    auto visit = [&](const std::string& path, const char* split, bool is_test) {
        auto [it, inserted] = seen.emplace(path, Membership{split, is_test});
        if (!inserted) {
            // Pairing the same frame into paired and unpaired training is
            // expected; any overlap with the test set is not, nor are
            // duplicates inside one split.
            if (it->second.is_test != is_test)
                violation("duplicate-path", path + " appears in both " + it->second.split +
                                                " and " + split);
            else if (it->second.split == split)
                violation("duplicate-path", path + " listed twice in " + split);
        }
    };

    for (const auto& p : manifest.unpaired_low) visit(p, "unpaired_train", false);
    for (const auto& p : manifest.unpaired_restored) visit(p, "unpaired_train", false);
    for (const auto& pe : manifest.paired_train) {
        visit(pe.good, "paired_train", false);
        visit(pe.restored, "paired_train", false);
    }
    for (const auto& pe : manifest.test) {
        visit(pe.good, "test", true);
        visit(pe.restored, "test", true);
    }

    std::map<std::string, std::optional<std::pair<int, int>>> dims;
    auto dim_of = [&](const std::string& rel) -> std::optional<std::pair<int, int>> {
        auto it = dims.find(rel);
        if (it != dims.end()) return it->second;
        std::optional<std::pair<int, int>> d;
        const auto full = root / rel;
        if (!std::filesystem::exists(full)) {
            violation("missing-file", rel);
        } else {
            try {
                const ImagePlane img = read_png(full);
                d = {{img.width(), img.height()}};
            } catch (const Error& e) {
                violation("missing-file", rel + ": " + e.what());
            }
        }
        dims.emplace(rel, d);
        return d;
    };

    auto check_pair = [&](const PairEntry& pe) {
        const auto a = dim_of(pe.good);
        const auto b = dim_of(pe.restored);
        if (a && b && *a != *b)
            violation("dimension-mismatch",
                      pe.good + " vs " + pe.restored + " (" + std::to_string(a->first) + "x" +
                          std::to_string(a->second) + " vs " + std::to_string(b->first) +
                          "x" + std::to_string(b->second) + ")");
    };
    for (const auto& p : manifest.unpaired_low) dim_of(p);
    for (const auto& p : manifest.unpaired_restored) dim_of(p);
    for (const auto& pe : manifest.paired_train) check_pair(pe);
    for (const auto& pe : manifest.test) check_pair(pe);

    if (opts.expected_resolution) {
        const auto [ew, eh] = *opts.expected_resolution;
        for (const auto& [path, d] : dims)
            if (d && (d->first != ew || d->second != eh))
                warning("unexpected-resolution",
                        path + " is " + std::to_string(d->first) + "x" +
                            std::to_string(d->second) + ", expected " + std::to_string(ew) +
                            "x" + std::to_string(eh));
    }
    return report;
}

std::set<std::string> load_exclusions(const std::filesystem::path& path) {
    std::set<std::string> out;
    std::ifstream in(path);
    if (!in) throw_io("cannot open " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        out.insert(line);
    }
    return out;
}

std::vector<ImageRecord> scan_records(const std::filesystem::path& root) {
    const auto raw = root / "raw";
    if (!std::filesystem::is_directory(raw))
        throw_io(raw.string() + " is not a directory");

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(raw))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<ImageRecord> records;
    for (const auto& file : files) {
        auto sidecar = file;
        sidecar.replace_extension(".json");
        if (!std::filesystem::exists(sidecar))
            throw_parse(file.string() + ": missing record sidecar " + sidecar.string());
        const json j = read_json_file(sidecar);

        ImageRecord rec;
        rec.path = "raw/" + file.filename().string();
        try {
            rec.site_id = j.at("site_id").get<std::string>();
            rec.dive_depth_m = j.at("dive_depth_m").get<double>();
            if (j.contains("distance_m")) rec.distance_m = j.at("distance_m").get<double>();
            if (j.contains("depth_series"))
                rec.depth_series = j.at("depth_series").get<std::vector<double>>();
            if (j.contains("quality")) {
                const auto q = j.at("quality").get<std::string>();
                if (q == "good") rec.quality = Quality::Good;
                else if (q == "low") rec.quality = Quality::Low;
                else throw_parse(sidecar.string() + ": unknown quality '" + q + "'");
            }
        } catch (const json::exception& e) {
            throw_parse(sidecar.string() + ": " + e.what());
        }
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace hydroptic::dataset
