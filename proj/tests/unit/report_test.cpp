#include "support/helpers.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace heatmetrics;
using testing_support::heatmap_of;
using testing_support::TempDir;
namespace fx = heatmetrics::fixtures;

namespace {

MetricsRow row(const std::string& name, const Heatmap& h, std::optional<double> m_in = std::nullopt) {
    MetricsRow r;
    r.sample = name;
    r.method = "sensitivity";
    r.config_hash = "abc123";
    r.scores = quality_scores(h);
    r.m_in = m_in;
    return r;
}

std::vector<MetricsRow> three_rows() {
    const Grid g(1, 1, 4);
    return {row("a", heatmap_of(g, {0.25, 0.25, 0.25, 0.25}), 0.5),
            row("b", heatmap_of(g, {1, 0, 0, 0}), 0.25),
            row("c,\"quoted\"", heatmap_of(g, {0, 0, 0.5, 0.5}))};
}

}  // namespace

TEST(Report, AggregatesMatchHandComputation) {
    const auto rows = three_rows();
    const auto agg = aggregate(rows);
    // TV of the three rows: 0, 0.25, 0.125.
    const double mean_tv = (0.0 + 0.25 + 0.125) / 3.0;
    const double var_tv = ((0 - mean_tv) * (0 - mean_tv) + (0.25 - mean_tv) * (0.25 - mean_tv) +
                           (0.125 - mean_tv) * (0.125 - mean_tv)) / 3.0;
    ASSERT_EQ(agg[0].first, "tv");
    EXPECT_NEAR(agg[0].second->mean, mean_tv, 1e-15);
    EXPECT_NEAR(agg[0].second->std, std::sqrt(var_tv), 1e-15);
    EXPECT_EQ(agg[0].second->count, 3u);
    // Gini: 0, 0.75, 0.5.
    ASSERT_EQ(agg[3].first, "gini");
    EXPECT_NEAR(agg[3].second->mean, 1.25 / 3.0, 1e-15);
    // m_in only on two rows.
    ASSERT_EQ(agg[4].first, "m_in");
    EXPECT_EQ(agg[4].second->count, 2u);
    EXPECT_DOUBLE_EQ(agg[4].second->mean, 0.375);
    EXPECT_DOUBLE_EQ(agg[4].second->std, 0.125);
    EXPECT_FALSE(agg[5].second.has_value());
}

TEST(Report, EmptyRowsGiveNullAggregates) {
    const std::string text = render_report_json({}, {});
    const auto doc = nlohmann::json::parse(text);
    EXPECT_TRUE(doc.at("samples").empty());
    EXPECT_TRUE(doc.at("aggregate").is_null());
    EXPECT_TRUE(parse_report_json(text).rows.empty());
}

TEST(Report, JsonSerializeParseSerializeIsByteIdentical) {
    ReportMeta meta;
    meta.config_hash = "abc123";
    meta.config["seed"] = 7;
    meta.config["noise_scale"] = 0.15;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::vector<MetricsRow> rows = three_rows();
        const Grid g(2, 3, 4);
        rows.push_back(row("rand", heatmap_of(g, oracle::random_heatmap_values(g.size(), seed)), 1.0 / 3.0));
        rows.back().deletion_score = 0.1 * double(seed) + 1e-17;
        const std::string a = render_report_json(meta, rows);
        const LoadedReport back = parse_report_json(a);
        EXPECT_EQ(render_report_json(back.meta, back.rows), a);
    }
}

TEST(Report, FloatsUseSeventeenDigits) {
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(-0.0), "0");
    EXPECT_EQ(format_double(INFINITY), "null");
}

TEST(Report, TamperedAggregateIsRejected) {
    const std::string text = render_report_json({}, three_rows());
    auto doc = nlohmann::ordered_json::parse(text);
    doc["aggregate"]["metrics"]["tv"]["mean"] = 0.5;
    EXPECT_THROW((void)parse_report_json(doc.dump()), FormatError);
    doc = nlohmann::ordered_json::parse(text);
    doc["aggregate"]["count"] = 2;
    EXPECT_THROW((void)parse_report_json(doc.dump()), FormatError);
    EXPECT_THROW((void)parse_report_json("{"), FormatError);
}

TEST(Report, CsvQuotingAndAggregateRows) {
    const std::string csv = render_report_csv({}, three_rows());
    std::vector<std::string> lines;
    std::size_t start = 0;
    for (std::size_t pos; (pos = csv.find("\r\n", start)) != std::string::npos; start = pos + 2)
        lines.push_back(csv.substr(start, pos - start));
    ASSERT_EQ(lines.size(), 1u + 3u + 3u);
    EXPECT_EQ(lines[0].substr(0, 20), "sample,method,tool_v");
    EXPECT_EQ(lines[3].substr(0, 15), "\"c,\"\"quoted\"\"\",");
    EXPECT_EQ(lines[4].substr(0, 15), "aggregate:mean,");
    EXPECT_EQ(lines[6].substr(0, 16), "aggregate:count,");
    EXPECT_EQ(render_report_csv({}, {}), lines[0] + "\r\n");
}

TEST(Report, EmitWritesFile) {
    TempDir dir("report");
    emit_report({}, three_rows(), dir / "r.json", ReportFormat::json);
    EXPECT_EQ(testing_support::read_text(dir / "r.json"), render_report_json({}, three_rows()));
    EXPECT_EQ(parse_report_format("csv"), ReportFormat::csv);
    EXPECT_THROW((void)parse_report_format("xml"), InvalidArgument);
}

TEST(Manifest, ParsesAndValidates) {
    TempDir dir("manifest");
    const Grid g(1, 2, 2);
    const Video v = fx::make_video({.grid = g});
    write_array(video_to_array(v), dir / "real.npy");
    write_array(video_to_array(v), dir / "fake.npy");
    write_array(mask_to_array(fx::face_layout(g).labels()), dir / "mask.npy");

    const std::string good = R"({"entries": [{"id": "x", "real_path": "real.npy", "fake_path": "fake.npy",
        "mask_path": "mask.npy", "part": "mouth", "alignment_attested": true}]})";
    const SampleManifest m = parse_manifest(good, dir.path());
    ASSERT_EQ(m.entries.size(), 1u);
    EXPECT_EQ(m.entries[0].real_path, dir / "real.npy");
    EXPECT_EQ(m.entries[0].part, Part::mouth);
    EXPECT_TRUE(m.entries[0].alignment_attested);

    EXPECT_THROW((void)parse_manifest(R"({"entries": [], "extra": 1})", dir.path()), FormatError);
    EXPECT_THROW((void)parse_manifest(R"({"entries": [{"id": "x", "real_path": "nope.npy", "fake_path": "fake.npy",
        "mask_path": "mask.npy"}]})", dir.path()), IoError);
    EXPECT_THROW((void)parse_manifest(R"({"entries": [{"id": "x", "real_path": "real.npy", "fake_path": "fake.npy",
        "mask_path": "mask.npy", "part": "chin"}]})", dir.path()), FormatError);
    const std::string dup = R"({"entries": [{"id": "x", "real_path": "real.npy", "fake_path": "fake.npy", "mask_path": "mask.npy"},
        {"id": "x", "real_path": "real.npy", "fake_path": "fake.npy", "mask_path": "mask.npy"}]})";
    EXPECT_THROW((void)parse_manifest(dup, dir.path()), FormatError);
    EXPECT_THROW((void)parse_manifest("not json", dir.path()), FormatError);
}
