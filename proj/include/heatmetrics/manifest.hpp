#pragma once

#include "heatmetrics/error.hpp"
#include "heatmetrics/manipulation.hpp"
#include "heatmetrics/report.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace heatmetrics {

/// One aligned real/fake pair with its part-label mask.
struct ManifestEntry {
    std::string id;
    std::filesystem::path real_path;
    std::filesystem::path fake_path;
    std::filesystem::path mask_path;
    /// Restricts swapping to one part; all requested parts when unset.
    std::optional<Part> part;
    /// The pair was aligned in preprocessing. Entries without it are rejected.
    bool alignment_attested = false;
};

struct SampleManifest {
    std::vector<ManifestEntry> entries;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) throw FormatError(where + ": unknown key '" + it.key() + "'");
    }
}

}  // namespace detail

/// Parses a pair manifest. Relative paths resolve against `base_dir`; every
/// referenced file must exist.
[[nodiscard]] inline SampleManifest parse_manifest(std::string_view text,
                                                   const std::filesystem::path& base_dir) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
    }
    SampleManifest m;
    try {
        detail::reject_unknown_keys(doc, {"entries"}, "manifest");
        std::set<std::string> seen;
        for (const auto& e : doc.at("entries")) {
            detail::reject_unknown_keys(
                e, {"id", "real_path", "fake_path", "mask_path", "part", "alignment_attested"},
                "manifest entry");
            ManifestEntry entry;
            entry.id = e.at("id").get<std::string>();
            if (entry.id.empty() || !seen.insert(entry.id).second) {
                throw FormatError("manifest entry ids must be nonempty and unique: '" + entry.id + "'");
            }
            auto resolve = [&](const char* key) {
                std::filesystem::path p = e.at(key).get<std::string>();
                if (p.is_relative()) p = base_dir / p;
                if (!std::filesystem::exists(p)) {
                    throw IoError("manifest entry '" + entry.id + "': no such file '" + p.string() + "'");
                }
                return p;
            };
            entry.real_path = resolve("real_path");
            entry.fake_path = resolve("fake_path");
            entry.mask_path = resolve("mask_path");
            if (e.contains("part")) {
                const auto name = e.at("part").get<std::string>();
                entry.part = parse_part(name);
                if (!entry.part) throw FormatError("manifest entry '" + entry.id + "': unknown part '" + name + "'");
            }
            entry.alignment_attested = e.value("alignment_attested", false);
            m.entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

[[nodiscard]] inline SampleManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str(), path.parent_path());
}

/// Written by the part-swap command: one record per emitted sample.
struct SwapRecord {
    std::string id;
    Part part = Part::background;
    std::string video_path;
    std::string mask_path;
    std::string source_real;
    std::string source_fake;
};

struct SkipRecord {
    std::string id;
    Part part = Part::background;
    std::string reason;
};

[[nodiscard]] inline std::string render_swap_manifest(const std::vector<SwapRecord>& samples,
                                                      const std::vector<SkipRecord>& skipped) {
    ordered_json doc;
    ordered_json s = ordered_json::array();
    for (const SwapRecord& r : samples) {
        ordered_json j;
        j["id"] = r.id;
        j["part"] = part_name(r.part);
        j["video_path"] = r.video_path;
        j["mask_path"] = r.mask_path;
        j["source_real"] = r.source_real;
        j["source_fake"] = r.source_fake;
        s.push_back(j);
    }
    ordered_json k = ordered_json::array();
    for (const SkipRecord& r : skipped) {
        ordered_json j;
        j["id"] = r.id;
        j["part"] = part_name(r.part);
        j["reason"] = r.reason;
        k.push_back(j);
    }
    doc["samples"] = s;
    doc["skipped"] = k;
    return dump_json(doc);
}

}  // namespace heatmetrics
