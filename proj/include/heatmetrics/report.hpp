#pragma once

#include "heatmetrics/error.hpp"
#include "heatmetrics/npy.hpp"
#include "heatmetrics/quality.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace heatmetrics {

using ordered_json = nlohmann::ordered_json;

inline constexpr std::string_view kToolName = "heatmetrics";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// One evaluated heatmap.
struct MetricsRow {
    std::string sample;
    std::string method;
    std::string tool_version{kToolVersion};
    std::string config_hash;
    QualityScores scores;
    std::optional<double> m_in;
    std::optional<double> p_100;
    std::optional<double> deletion_score;
};

/// Run-level provenance written alongside the rows.
struct ReportMeta {
    std::string config_hash;
    ordered_json config = ordered_json::object();
};

struct MetricStat {
    std::size_t count = 0;
    double mean = 0.0;
    /// Population standard deviation.
    double std = 0.0;
};

/// Scalar metrics that are aggregated, in report order.
inline constexpr std::array<std::string_view, 7> kAggregatedMetrics = {
    "tv", "sigma_det", "sigma_cuberoot", "gini", "m_in", "p_100", "deletion_score"};

[[nodiscard]] inline std::optional<double> metric_value(const MetricsRow& r, std::string_view name) {
    if (name == "tv") return r.scores.tv;
    if (name == "sigma_det") return r.scores.sigma_det;
    if (name == "sigma_cuberoot") return r.scores.sigma_cuberoot;
    if (name == "gini") return r.scores.gini;
    if (name == "m_in") return r.m_in;
    if (name == "p_100") return r.p_100;
    if (name == "deletion_score") return r.deletion_score;
    throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

/// Mean and population standard deviation of each metric over the rows that
/// carry it; empty when no row does.
[[nodiscard]] inline std::vector<std::pair<std::string, std::optional<MetricStat>>> aggregate(
    const std::vector<MetricsRow>& rows) {
    std::vector<std::pair<std::string, std::optional<MetricStat>>> out;
    for (std::string_view name : kAggregatedMetrics) {
        std::vector<double> xs;
        for (const MetricsRow& r : rows)
            if (auto v = metric_value(r, name)) xs.push_back(*v);
        if (xs.empty()) {
            out.emplace_back(std::string(name), std::nullopt);
            continue;
        }
        MetricStat s;
        s.count = xs.size();
        double sum = 0.0;
        for (double x : xs) sum += x;
        s.mean = sum / double(xs.size());
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / double(xs.size()));
        out.emplace_back(std::string(name), s);
    }
    return out;
}

/// 17 significant digits, so every finite double round-trips exactly.
[[nodiscard]] inline std::string format_double(double x) {
    if (!std::isfinite(x)) return "null";
    if (x == 0.0) x = 0.0;  // drop the sign of negative zero
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// JSON text with numbers in %.17g and two-space indentation. Key order is
/// the insertion order of the ordered_json.
inline void dump_json(const ordered_json& j, std::string& out, int indent = 0) {
    const std::string pad(std::size_t(indent) * 2, ' ');
    const std::string inner(std::size_t(indent + 1) * 2, ' ');
    switch (j.type()) {
        case ordered_json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += inner + ordered_json(it.key()).dump() + ": ";
                dump_json(it.value(), out, indent + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case ordered_json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            bool scalars = true;
            for (const auto& e : j) scalars = scalars && !e.is_structured();
            if (scalars) {
                out += "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) out += ", ";
                    dump_json(j[i], out, indent + 1);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ",\n";
                out += inner;
                dump_json(j[i], out, indent + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case ordered_json::value_t::number_float:
            out += format_double(j.get<double>());
            return;
        default:
            out += j.dump();
            return;
    }
}

[[nodiscard]] inline std::string dump_json(const ordered_json& j) {
    std::string out;
    dump_json(j, out);
    out += "\n";
    return out;
}

namespace detail {

inline ordered_json optional_number(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

inline std::optional<double> read_optional(const ordered_json& j, const char* key) {
    if (!j.contains(key)) throw FormatError(std::string("report row lacks '") + key + "'");
    if (j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace detail

[[nodiscard]] inline ordered_json row_to_json(const MetricsRow& r) {
    const QualityScores& q = r.scores;
    ordered_json j;
    j["sample"] = r.sample;
    j["method"] = r.method;
    j["tool_version"] = r.tool_version;
    j["config_hash"] = r.config_hash;
    j["tv"] = q.tv;
    j["sigma_det"] = q.sigma_det;
    j["sigma_cuberoot"] = q.sigma_cuberoot;
    j["gini"] = q.gini;
    j["mean"] = {q.mean[0], q.mean[1], q.mean[2]};
    ordered_json cov = ordered_json::array();
    for (int i = 0; i < 3; ++i) cov.push_back({q.covariance(i, 0), q.covariance(i, 1), q.covariance(i, 2)});
    j["covariance"] = cov;
    j["rank_deficient"] = q.rank_deficient;
    j["m_in"] = detail::optional_number(r.m_in);
    j["p_100"] = detail::optional_number(r.p_100);
    j["deletion_score"] = detail::optional_number(r.deletion_score);
    return j;
}

[[nodiscard]] inline MetricsRow row_from_json(const ordered_json& j) {
    try {
        MetricsRow r;
        r.sample = j.at("sample").get<std::string>();
        r.method = j.at("method").get<std::string>();
        r.tool_version = j.at("tool_version").get<std::string>();
        r.config_hash = j.at("config_hash").get<std::string>();
        r.scores.tv = j.at("tv").get<double>();
        r.scores.sigma_det = j.at("sigma_det").get<double>();
        r.scores.sigma_cuberoot = j.at("sigma_cuberoot").get<double>();
        r.scores.gini = j.at("gini").get<double>();
        for (int i = 0; i < 3; ++i) r.scores.mean[std::size_t(i)] = j.at("mean").at(std::size_t(i)).get<double>();
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k)
                r.scores.covariance(i, k) = j.at("covariance").at(std::size_t(i)).at(std::size_t(k)).get<double>();
        r.scores.rank_deficient = j.at("rank_deficient").get<bool>();
        r.m_in = detail::read_optional(j, "m_in");
        r.p_100 = detail::read_optional(j, "p_100");
        r.deletion_score = detail::read_optional(j, "deletion_score");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed report row: ") + e.what());
    }
}

[[nodiscard]] inline ordered_json aggregate_to_json(const std::vector<MetricsRow>& rows) {
    if (rows.empty()) return nullptr;
    ordered_json j;
    j["count"] = rows.size();
    ordered_json metrics;
    for (const auto& [name, stat] : aggregate(rows)) {
        if (!stat) {
            metrics[name] = nullptr;
            continue;
        }
        metrics[name] = {{"count", stat->count}, {"mean", stat->mean}, {"std", stat->std}};
    }
    j["metrics"] = metrics;
    return j;
}

[[nodiscard]] inline std::string render_report_json(const ReportMeta& meta,
                                                    const std::vector<MetricsRow>& rows) {
    ordered_json doc;
    doc["tool"] = kToolName;
    doc["tool_version"] = kToolVersion;
    doc["config_hash"] = meta.config_hash;
    doc["config"] = meta.config;
    ordered_json samples = ordered_json::array();
    for (const MetricsRow& r : rows) samples.push_back(row_to_json(r));
    doc["samples"] = samples;
    doc["aggregate"] = aggregate_to_json(rows);
    return dump_json(doc);
}

namespace detail {

inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string csv_number(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

}  // namespace detail

inline constexpr std::array<std::string_view, 21> kCsvColumns = {
    "sample", "method", "tool_version", "config_hash", "tv", "sigma_det", "sigma_cuberoot",
    "gini", "mean_t", "mean_u", "mean_w", "cov_tt", "cov_tu", "cov_tw", "cov_uu", "cov_uw",
    "cov_ww", "rank_deficient", "m_in", "p_100", "deletion_score"};

/// CSV with a header row, one row per sample, then "aggregate:mean",
/// "aggregate:std" and "aggregate:count" rows filling the metric columns.
[[nodiscard]] inline std::string render_report_csv(const ReportMeta& meta,
                                                   const std::vector<MetricsRow>& rows) {
    (void)meta;
    std::string out;
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
        if (i) out += ',';
        out += kCsvColumns[i];
    }
    out += "\r\n";
    auto emit = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += detail::csv_field(fields[i]);
        }
        out += "\r\n";
    };
    for (const MetricsRow& r : rows) {
        const QualityScores& q = r.scores;
        emit({r.sample, r.method, r.tool_version, r.config_hash, format_double(q.tv),
              format_double(q.sigma_det), format_double(q.sigma_cuberoot), format_double(q.gini),
              format_double(q.mean[0]), format_double(q.mean[1]), format_double(q.mean[2]),
              format_double(q.covariance(0, 0)), format_double(q.covariance(0, 1)),
              format_double(q.covariance(0, 2)), format_double(q.covariance(1, 1)),
              format_double(q.covariance(1, 2)), format_double(q.covariance(2, 2)),
              q.rank_deficient ? "true" : "false", detail::csv_number(r.m_in),
              detail::csv_number(r.p_100), detail::csv_number(r.deletion_score)});
    }
    if (rows.empty()) return out;
    const auto agg = aggregate(rows);
    for (const char* kind : {"mean", "std", "count"}) {
        std::vector<std::string> fields(kCsvColumns.size());
        fields[0] = std::string("aggregate:") + kind;
        for (const auto& [name, stat] : agg) {
            const auto col = static_cast<std::size_t>(
                std::find(kCsvColumns.begin(), kCsvColumns.end(), name) - kCsvColumns.begin());
            if (!stat) continue;
            const std::string_view k(kind);
            fields[col] = k == "mean"  ? format_double(stat->mean)
                          : k == "std" ? format_double(stat->std)
                                       : std::to_string(stat->count);
        }
        emit(fields);
    }
    return out;
}

enum class ReportFormat { json, csv };

[[nodiscard]] inline ReportFormat parse_report_format(std::string_view s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw InvalidArgument("unknown report format '" + std::string(s) + "'");
}

[[nodiscard]] inline std::string render_report(const ReportMeta& meta,
                                               const std::vector<MetricsRow>& rows,
                                               ReportFormat format) {
    return format == ReportFormat::json ? render_report_json(meta, rows)
                                        : render_report_csv(meta, rows);
}

inline void emit_report(const ReportMeta& meta, const std::vector<MetricsRow>& rows,
                        const std::filesystem::path& path, ReportFormat format) {
    write_file_atomic(path, render_report(meta, rows, format));
}

struct LoadedReport {
    ReportMeta meta;
    std::vector<MetricsRow> rows;
};

namespace detail {

inline bool close_rel(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace detail

/// Parses a JSON report and checks that its aggregate block matches the rows.
[[nodiscard]] inline LoadedReport parse_report_json(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("report is not valid JSON: ") + e.what());
    }
    LoadedReport rep;
    try {
        rep.meta.config_hash = doc.at("config_hash").get<std::string>();
        rep.meta.config = doc.at("config");
        for (const auto& row : doc.at("samples")) rep.rows.push_back(row_from_json(row));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed report: ") + e.what());
    }
    const ordered_json& agg = doc.at("aggregate");
    if (rep.rows.empty()) {
        if (!agg.is_null()) throw FormatError("report without samples must have null aggregates");
        return rep;
    }
    if (agg.is_null() || agg.at("count").get<std::size_t>() != rep.rows.size()) {
        throw FormatError("aggregate count does not match the sample rows");
    }
    for (const auto& [name, stat] : aggregate(rep.rows)) {
        const ordered_json& m = agg.at("metrics").at(name);
        if (!stat) {
            if (!m.is_null()) throw FormatError("aggregate for '" + name + "' should be null");
            continue;
        }
        if (m.is_null() || m.at("count").get<std::size_t>() != stat->count ||
            !detail::close_rel(m.at("mean").get<double>(), stat->mean) ||
            !detail::close_rel(m.at("std").get<double>(), stat->std)) {
            throw FormatError("aggregate for '" + name + "' does not match the sample rows");
        }
    }
    return rep;
}

}  // namespace heatmetrics
