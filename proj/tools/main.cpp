// heatmetrics command-line tool.
//
// Exit codes: 0 success, 1 computation error, 2 input/parse/config error.

#include "cli_support.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace fs = std::filesystem;
using namespace heatmetrics;
using namespace heatmetrics::cli;

namespace {

struct Globals {
    std::string config_path;
    std::uint64_t seed = 0;
    std::uint64_t jobs = 0;
    std::string format = "json";
    CLI::Option* config_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;
    CLI::Option* format_opt = nullptr;
};

template <typename T>
void override_with(ordered_json& slot, const CLI::Option* opt, const T& value, const std::string& where) {
    if (opt->count() > 0) set_value(slot, ordered_json(value), where);
}

ordered_json load_config(const Globals& g) {
    ordered_json cfg = default_config();
    if (g.config_opt->count() > 0) merge_config(cfg, read_json_file(g.config_path, "config"));
    override_with(cfg["seed"], g.seed_opt, g.seed, "seed");
    override_with(cfg["jobs"], g.jobs_opt, g.jobs, "jobs");
    override_with(cfg["format"], g.format_opt, g.format, "format");
    try {
        (void)parse_report_format(cfg["format"].get<std::string>());
    } catch (const InvalidArgument& e) {
        input_error(std::string("config: ") + e.what());
    }
    return cfg;
}

std::size_t jobs_of(const ordered_json& cfg) { return resolve_jobs(cfg["jobs"].get<std::uint64_t>()); }

BinaryMask load_region(const std::string& path, const std::string& part_name) {
    return load_input("mask '" + path + "'", [&] {
        if (part_name.empty()) return load_binary_mask(path);
        const auto part = parse_part(part_name);
        if (!part) input_error("unknown part '" + part_name + "'");
        return BinaryMask::of_part(load_part_mask(path), *part);
    });
}

// ---------------------------------------------------------------------------

struct MetricsArgs {
    std::vector<std::string> heatmaps;
    std::vector<std::string> masks;
    std::vector<std::string> videos;
    std::string part;
    std::string classifier;
    std::string out;
    std::string method;
    bool normalize = false;
    std::uint64_t k = 100;
    std::uint64_t bins = 25;
    CLI::Option* method_opt = nullptr;
    CLI::Option* normalize_opt = nullptr;
    CLI::Option* k_opt = nullptr;
    CLI::Option* bins_opt = nullptr;
};

int run_metrics(const Globals& g, const MetricsArgs& a) {
    ordered_json cfg = load_config(g);
    ordered_json& sec = cfg["metrics"];
    override_with(sec["method"], a.method_opt, a.method, "metrics.method");
    override_with(sec["normalize"], a.normalize_opt, a.normalize, "metrics.normalize");
    override_with(sec["k"], a.k_opt, a.k, "metrics.k");
    override_with(sec["bins"], a.bins_opt, a.bins, "metrics.bins");
    const auto k = sec["k"].get<std::size_t>();
    const auto bins = sec["bins"].get<std::size_t>();
    const bool normalize = sec["normalize"].get<bool>();
    if (k == 0) input_error("--k must be positive");
    if (!a.masks.empty() && a.masks.size() != 1 && a.masks.size() != a.heatmaps.size()) {
        input_error("--masks takes one mask per heatmap or a single shared mask");
    }
    if (a.classifier.empty() != a.videos.empty()) input_error("--classifier and --videos must be given together");
    if (!a.videos.empty() && a.videos.size() != a.heatmaps.size()) input_error("--videos takes one video per heatmap");
    if (!a.classifier.empty() && bins == 0) input_error("--bins must be positive");

    std::optional<ClassifierSpec> spec;
    ordered_json extra = ordered_json::object();
    if (!a.classifier.empty()) {
        spec = load_classifier(a.classifier);
        extra["classifier"] = spec->json;
    }
    if (!a.part.empty()) extra["part"] = a.part;
    const EffectiveConfig eff = effective_config(cfg, "metrics", extra);

    std::vector<MetricsRow> rows(a.heatmaps.size());
    const auto errors = parallel_for(rows.size(), jobs_of(cfg), [&](std::size_t i) {
        const std::string& path = a.heatmaps[i];
        const Heatmap h = load_input("heatmap '" + path + "'", [&] { return load_heatmap(path, normalize); });
        MetricsRow& r = rows[i];
        r.sample = stem_of(path);
        r.method = sec["method"].get<std::string>();
        r.config_hash = eff.hash;
        r.scores = quality_scores(h);
        if (!a.masks.empty()) {
            const BinaryMask m = load_region(a.masks[a.masks.size() == 1 ? 0 : i], a.part);
            r.m_in = mass_inside(h, m);
            r.p_100 = precision_at_k(h, m, k);
        }
        if (spec) {
            const Video v = load_input("video '" + a.videos[i] + "'", [&] { return load_video(a.videos[i]); });
            const auto f = spec->make(v.grid(), v.channels());
            r.deletion_score = deletion_score(*f, v, h, bins).score;
        }
    });
    if (const int code = report_failures(errors, a.heatmaps); code != kOk) return code;

    const ReportMeta meta{eff.hash, eff.json};
    const ReportFormat format = parse_report_format(cfg["format"].get<std::string>());
    if (a.out.empty()) std::cout << render_report(meta, rows, format);
    else emit_report(meta, rows, a.out, format);
    return kOk;
}

// ---------------------------------------------------------------------------

struct ExplainArgs {
    std::string classifier;
    std::vector<std::string> videos;
    std::string out_dir;
    std::string baseline;
    std::string method;
    std::uint64_t samples = 25;
    double noise_scale = 0.15;
    std::uint64_t steps = 25;
    CLI::Option* method_opt = nullptr;
    CLI::Option* samples_opt = nullptr;
    CLI::Option* noise_opt = nullptr;
    CLI::Option* steps_opt = nullptr;
};

int run_explain(const Globals& g, const ExplainArgs& a) {
    ordered_json cfg = load_config(g);
    ordered_json& sec = cfg["explain"];
    override_with(sec["method"], a.method_opt, a.method, "explain.method");
    override_with(sec["samples"], a.samples_opt, a.samples, "explain.samples");
    override_with(sec["noise_scale"], a.noise_opt, a.noise_scale, "explain.noise_scale");
    override_with(sec["steps"], a.steps_opt, a.steps, "explain.steps");
    const std::string method = sec["method"].get<std::string>();
    if (method != "sensitivity" && method != "gradxinput" && method != "smoothgrad" && method != "intgrad") {
        input_error("unknown explanation method '" + method + "'");
    }
    const SmoothGradConfig sg{sec["samples"].get<std::size_t>(), sec["noise_scale"].get<double>(),
                              cfg["seed"].get<std::uint64_t>()};
    if (method == "smoothgrad" && sg.samples == 0) input_error("--samples must be positive");
    if (method == "smoothgrad" && !(sg.noise_scale >= 0.0)) input_error("--noise-scale must be nonnegative");
    const auto steps = sec["steps"].get<std::size_t>();
    if (method == "intgrad" && steps == 0) input_error("--steps must be positive");

    const ClassifierSpec spec = load_classifier(a.classifier);
    ordered_json extra = ordered_json::object();
    extra["classifier"] = spec.json;
    std::optional<Video> baseline;
    if (!a.baseline.empty()) {
        baseline = load_input("baseline '" + a.baseline + "'", [&] { return load_video(a.baseline); });
        extra["baseline"] = a.baseline;
    }
    const EffectiveConfig eff = effective_config(cfg, "explain", extra);
    fs::create_directories(a.out_dir);

    const auto errors = parallel_for(a.videos.size(), jobs_of(cfg), [&](std::size_t i) {
        const std::string& path = a.videos[i];
        const Video v = load_input("video '" + path + "'", [&] { return load_video(path); });
        const auto f = spec.make(v.grid(), v.channels());
        RawAttribution raw = [&] {
            if (method == "sensitivity") return sensitivity(*f, v);
            if (method == "gradxinput") return gradient_times_input(*f, v);
            if (method == "smoothgrad") return smoothgrad(*f, v, sg);
            return integrated_gradients(*f, v, IntegratedGradConfig{steps, baseline});
        }();
        const Heatmap h = normalize_attribution(raw);
        const std::string base = stem_of(path) + "_" + method;
        write_array(heatmap_to_array(h), fs::path(a.out_dir) / (base + ".npy"));
        ordered_json side;
        side["sample"] = stem_of(path);
        side["source"] = path;
        side["method"] = method;
        side["seed"] = cfg["seed"];
        side["tool_version"] = kToolVersion;
        side["config_hash"] = eff.hash;
        side["config"] = eff.json;
        write_file_atomic(fs::path(a.out_dir) / (base + ".json"), dump_json(side));
    });
    return report_failures(errors, a.videos);
}

// ---------------------------------------------------------------------------

struct DeletionArgs {
    std::string classifier;
    std::string video;
    std::string heatmap;
    std::string out;
    bool normalize = false;
    std::uint64_t bins = 25;
    CLI::Option* bins_opt = nullptr;
};

int run_deletion(const Globals& g, const DeletionArgs& a) {
    ordered_json cfg = load_config(g);
    override_with(cfg["deletion"]["bins"], a.bins_opt, a.bins, "deletion.bins");
    const auto bins = cfg["deletion"]["bins"].get<std::size_t>();
    if (bins == 0) input_error("--bins must be positive");
    const ClassifierSpec spec = load_classifier(a.classifier);
    const EffectiveConfig eff = effective_config(cfg, "deletion", {{"classifier", spec.json}});

    const Video v = load_input("video '" + a.video + "'", [&] { return load_video(a.video); });
    const Heatmap h = load_input("heatmap '" + a.heatmap + "'", [&] { return load_heatmap(a.heatmap, a.normalize); });
    require_same_grid(v.grid(), h.grid(), "deletion(video, heatmap)");
    const auto f = spec.make(v.grid(), v.channels());
    const DeletionCurve curve = deletion_score(*f, v, h, bins);

    ordered_json doc;
    doc["sample"] = stem_of(a.heatmap);
    doc["score"] = curve.score;
    doc["alphas"] = curve.alphas;
    doc["confidences"] = curve.confidences;
    doc["removed"] = curve.removed;
    doc["config_hash"] = eff.hash;
    doc["config"] = eff.json;
    if (a.out.empty()) std::cout << dump_json(doc);
    else write_file_atomic(a.out, dump_json(doc));
    return kOk;
}

// ---------------------------------------------------------------------------

struct PartswapArgs {
    std::string manifest;
    std::string out_dir;
    std::vector<std::string> parts;
    CLI::Option* parts_opt = nullptr;
};

int run_partswap(const Globals& g, const PartswapArgs& a) {
    ordered_json cfg = load_config(g);
    override_with(cfg["partswap"]["parts"], a.parts_opt, a.parts, "partswap.parts");
    std::vector<Part> parts;
    for (const auto& name : cfg["partswap"]["parts"]) {
        const auto p = parse_part(name.get<std::string>());
        if (!p) input_error("unknown part '" + name.get<std::string>() + "'");
        parts.push_back(*p);
    }
    const SampleManifest manifest =
        load_input("manifest '" + a.manifest + "'", [&] { return load_manifest(a.manifest); });
    for (const ManifestEntry& e : manifest.entries) {
        if (!e.alignment_attested) input_error("manifest entry '" + e.id + "' is not attested as aligned");
    }
    const EffectiveConfig eff = effective_config(cfg, "partswap");
    fs::create_directories(a.out_dir);

    struct Item {
        const ManifestEntry* entry;
        Part part;
    };
    std::vector<Item> items;
    for (const ManifestEntry& e : manifest.entries) {
        if (e.part) items.push_back({&e, *e.part});
        else
            for (Part p : parts) items.push_back({&e, p});
    }

    std::vector<std::optional<SwapRecord>> done(items.size());
    std::vector<std::optional<SkipRecord>> skipped(items.size());
    std::vector<std::string> names;
    for (const Item& it : items) names.push_back(it.entry->id + "/" + std::string(part_name(it.part)));
    const auto errors = parallel_for(items.size(), jobs_of(cfg), [&](std::size_t i) {
        const ManifestEntry& e = *items[i].entry;
        const Part part = items[i].part;
        const NpyArray real_raw =
            load_input("video '" + e.real_path.string() + "'", [&] { return read_array(e.real_path); });
        const Video real = load_input("video '" + e.real_path.string() + "'", [&] { return video_from_array(real_raw); });
        const Video fake = load_input("video '" + e.fake_path.string() + "'", [&] { return load_video(e.fake_path); });
        const PartMask labels =
            load_input("mask '" + e.mask_path.string() + "'", [&] { return load_part_mask(e.mask_path); });
        try {
            const PartSwapSample s = part_swap(real, fake, labels, part, {e.id + ":real", e.id + ":fake"});
            const std::string base = e.id + "_" + std::string(part_name(part));
            NpyArray out = video_to_array(s.video, real_raw.dtype);
            if (real_raw.shape.size() == 3) out.shape.pop_back();
            write_array(out, fs::path(a.out_dir) / (base + ".npy"));
            write_array(mask_to_array(s.mask.bits()), fs::path(a.out_dir) / (base + "_mask.npy"));
            done[i] = SwapRecord{e.id, part, base + ".npy", base + "_mask.npy", e.real_path.string(),
                                 e.fake_path.string()};
        } catch (const EmptyPart& x) {
            skipped[i] = SkipRecord{e.id, part, x.what()};
        }
    });
    if (const int code = report_failures(errors, names); code != kOk) return code;

    std::vector<SwapRecord> records;
    std::vector<SkipRecord> skips;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (done[i]) records.push_back(*done[i]);
        if (skipped[i]) skips.push_back(*skipped[i]);
    }
    write_file_atomic(fs::path(a.out_dir) / "samples.json", render_swap_manifest(records, skips));
    std::cout << records.size() << " sample(s) written, config " << eff.hash << "\n";
    if (!skips.empty()) {
        std::cerr << "heatmetrics: warning: " << skips.size() << " swap(s) skipped for empty parts\n";
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct VisualizeArgs {
    std::string video;
    std::string heatmap;
    std::string mask;
    std::string frames;
    std::string out_dir;
    std::vector<std::string> modes;
    bool normalize = false;
    double alpha = 0.5;
    double clip_percentile = 99.0;
    double smooth_std = 1.5;
    double n_std = 2.0;
    std::vector<double> scales;
    double threshold = 1e-4;
    std::string colormap;
    CLI::Option* modes_opt = nullptr;
    CLI::Option* alpha_opt = nullptr;
    CLI::Option* clip_opt = nullptr;
    CLI::Option* smooth_opt = nullptr;
    CLI::Option* n_std_opt = nullptr;
    CLI::Option* scales_opt = nullptr;
    CLI::Option* threshold_opt = nullptr;
    CLI::Option* colormap_opt = nullptr;
};

/// "a:b" (half-open), "a" or empty for every frame.
std::pair<std::size_t, std::size_t> parse_frames(const std::string& s, std::size_t count) {
    if (s.empty()) return {0, count};
    auto number = [&](const std::string& t) -> std::size_t {
        if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
            input_error("--frames expects 'a:b' or 'a', got '" + s + "'");
        }
        return std::stoul(t);
    };
    const auto colon = s.find(':');
    const std::size_t lo = number(s.substr(0, colon));
    const std::size_t hi = colon == std::string::npos ? lo + 1 : number(s.substr(colon + 1));
    if (lo >= hi) input_error("--frames range '" + s + "' is empty");
    if (hi > count) {
        input_error("--frames range '" + s + "' exceeds the clip, which has " + std::to_string(count) +
                    " frame(s) (valid frames 0.." + std::to_string(count - 1) + ")");
    }
    return {lo, hi};
}

int run_visualize(const Globals& g, const VisualizeArgs& a) {
    ordered_json cfg = load_config(g);
    ordered_json& sec = cfg["visualize"];
    override_with(sec["modes"], a.modes_opt, a.modes, "visualize.modes");
    override_with(sec["alpha"], a.alpha_opt, a.alpha, "visualize.alpha");
    override_with(sec["clip_percentile"], a.clip_opt, a.clip_percentile, "visualize.clip_percentile");
    override_with(sec["smooth_std"], a.smooth_opt, a.smooth_std, "visualize.smooth_std");
    override_with(sec["n_std"], a.n_std_opt, a.n_std, "visualize.n_std");
    override_with(sec["scales"], a.scales_opt, a.scales, "visualize.scales");
    override_with(sec["threshold"], a.threshold_opt, a.threshold, "visualize.threshold");
    override_with(sec["colormap"], a.colormap_opt, a.colormap, "visualize.colormap");

    std::vector<VizMode> modes;
    try {
        for (const auto& m : sec["modes"]) modes.push_back(parse_viz_mode(m.get<std::string>()));
        (void)colormap(sec["colormap"].get<std::string>(), 0.0);
    } catch (const InvalidArgument& e) {
        input_error(e.what());
    }
    if (modes.empty()) input_error("no visualization modes requested");
    const bool semantic = std::find(modes.begin(), modes.end(), VizMode::semantic) != modes.end();
    if (semantic && a.mask.empty()) input_error("mode 'semantic' needs --mask with part labels");
    const RenderOptions ropt{sec["alpha"].get<double>(), sec["colormap"].get<std::string>()};
    if (!(ropt.alpha >= 0.0 && ropt.alpha <= 1.0)) input_error("--alpha must lie in [0,1]");
    const EffectiveConfig eff = effective_config(cfg, "visualize");

    const Video v = load_input("video '" + a.video + "'", [&] { return load_video(a.video); });
    const Heatmap h = load_input("heatmap '" + a.heatmap + "'", [&] { return load_heatmap(a.heatmap, a.normalize); });
    require_same_grid(v.grid(), h.grid(), "visualize(video, heatmap)");
    std::optional<PartMask> parts;
    if (!a.mask.empty()) {
        parts = load_input("mask '" + a.mask + "'", [&] { return load_part_mask(a.mask); });
        require_same_grid(v.grid(), parts->grid(), "visualize(video, mask)");
    }
    const auto [lo, hi] = parse_frames(a.frames, v.grid().frames());

    std::vector<OverlayArtifact> artifacts;
    for (VizMode m : modes) {
        switch (m) {
            case VizMode::enhanced:
                artifacts.emplace_back(enhance(h, {sec["clip_percentile"].get<double>(), sec["smooth_std"].get<double>(),
                                                   sec["temporal_std"].get<double>()}));
                break;
            case VizMode::gaussian: artifacts.emplace_back(gaussian_match(h, sec["n_std"].get<double>())); break;
            case VizMode::blobs:
                artifacts.emplace_back(
                    detect_blobs(h, {sec["scales"].get<std::vector<double>>(), sec["threshold"].get<double>()}));
                break;
            case VizMode::semantic: artifacts.emplace_back(SemanticOverlay{semantic_aggregate(h, *parts), *parts}); break;
        }
    }

    fs::create_directories(a.out_dir);
    const std::size_t frames = hi - lo;
    std::vector<std::string> names(modes.size() * frames);
    for (std::size_t i = 0; i < names.size(); ++i) {
        names[i] = stem_of(a.video) + "_" + std::string(viz_mode_name(modes[i / frames])) + "_f" +
                   std::to_string(lo + i % frames) + ".png";
    }
    const auto errors = parallel_for(names.size(), jobs_of(cfg), [&](std::size_t i) {
        const Raster r = render_overlay(v, artifacts[i / frames], lo + i % frames, ropt);
        write_file_atomic(fs::path(a.out_dir) / names[i], encode_png(r));
    });
    if (const int code = report_failures(errors, names); code != kOk) return code;
    for (const auto& n : names) std::cout << (fs::path(a.out_dir) / n).string() << "\n";
    (void)eff;
    return kOk;
}

// ---------------------------------------------------------------------------

struct FixturesArgs {
    std::string out_dir;
    std::size_t frames = 4;
    std::size_t rows = 32;
    std::size_t cols = 32;
};

int run_fixtures(const Globals& g, const FixturesArgs& a) {
    namespace fx = heatmetrics::fixtures;
    const ordered_json cfg = load_config(g);
    const auto seed = cfg["seed"].get<std::uint64_t>();
    const Grid grid(a.frames, a.rows, a.cols);
    const fs::path out = a.out_dir;
    fs::create_directories(out);

    const fx::AlignedPair pair = load_input("fixture grid", [&] {
        return fx::make_aligned_pair({.grid = grid, .seed = seed, .planted = Part::mouth});
    });
    write_array(video_to_array(pair.real), out / "real.npy");
    write_array(video_to_array(pair.fake), out / "fake.npy");
    write_array(mask_to_array(pair.parts.labels()), out / "parts.npy");
    write_array(mask_to_array(BinaryMask::of_part(pair.parts, Part::mouth).bits()), out / "mouth_mask.npy");

    const double cu = (double(a.rows) - 1.0) / 2.0, cw = (double(a.cols) - 1.0) / 2.0;
    write_array(heatmap_to_array(fx::make_heatmap({.kind = fx::Pattern::uniform, .grid = grid})), out / "uniform.npy");
    write_array(heatmap_to_array(fx::make_heatmap({.kind = fx::Pattern::gaussian_blob,
                                                   .grid = grid,
                                                   .center = {double(a.frames) / 2.0, cu, cw},
                                                   .std = std::max(1.0, double(std::min(a.rows, a.cols)) / 10.0),
                                                   .temporal_std = 1.0})),
                out / "blob.npy");
    write_array(heatmap_to_array(fx::make_heatmap({.kind = fx::Pattern::random, .grid = grid, .seed = seed})),
                out / "random.npy");

    ordered_json manifest;
    manifest["entries"] = ordered_json::array();
    manifest["entries"].push_back({{"id", "demo"},
                                   {"real_path", "real.npy"},
                                   {"fake_path", "fake.npy"},
                                   {"mask_path", "parts.npy"},
                                   {"alignment_attested", true}});
    write_file_atomic(out / "manifest.json", dump_json(manifest));
    write_file_atomic(out / "constant.json", dump_json(ordered_json{{"kind", "constant"}, {"value", 0.5}}));
    write_file_atomic(out / "linear.json",
                      dump_json(ordered_json{{"kind", "linear"}, {"seed", seed}, {"bias", 0.5}}));
    write_file_atomic(out / "masked_mean.json",
                      dump_json(ordered_json{{"kind", "masked-mean"}, {"mask", "parts.npy"}, {"part", "mouth"}}));
    if (grid.size() * 3 <= kQuadraticMaxInputs) {
        write_file_atomic(out / "quadratic.json", dump_json(ordered_json{{"kind", "quadratic"},
                                                                         {"seed", seed},
                                                                         {"squash", "logistic"},
                                                                         {"curvature", 1.0},
                                                                         {"slope", 1.0}}));
    } else {
        std::cerr << "heatmetrics: note: quadratic.json skipped, grid exceeds " << kQuadraticMaxInputs << " inputs\n";
    }
    std::cout << "fixtures written to " << out.string() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quality metrics, explanations and visualizations for video relevance heatmaps", "heatmetrics"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    g.config_opt = app.add_option("--config", g.config_path, "JSON run configuration")->envname("HEATMETRICS_CONFIG");
    g.seed_opt = app.add_option("--seed", g.seed, "Random seed")->envname("HEATMETRICS_SEED");
    g.jobs_opt = app.add_option("--jobs", g.jobs, "Worker threads, 0 for all cores")->envname("HEATMETRICS_JOBS");
    g.format_opt = app.add_option("--format", g.format, "Report format: json or csv")->envname("HEATMETRICS_FORMAT");

    std::function<int()> run;

    MetricsArgs ma;
    auto* metrics = app.add_subcommand("metrics", "Score heatmaps");
    metrics->add_option("heatmaps", ma.heatmaps, "Heatmap .npy files")->required();
    metrics->add_option("--masks", ma.masks, "Ground-truth masks, one per heatmap or one shared");
    metrics->add_option("--part", ma.part, "Treat masks as part labels and use this part");
    ma.normalize_opt = metrics->add_flag("--normalize", ma.normalize, "Normalize raw attributions to unit mass");
    ma.k_opt = metrics->add_option("--k", ma.k, "Top-k size for precision");
    ma.method_opt = metrics->add_option("--method", ma.method, "Method label recorded in the report");
    metrics->add_option("--classifier", ma.classifier, "Classifier spec for deletion scores");
    metrics->add_option("--videos", ma.videos, "Videos for deletion scores, one per heatmap");
    ma.bins_opt = metrics->add_option("--bins", ma.bins, "Deletion curve bins");
    metrics->add_option("--out", ma.out, "Report path (stdout when omitted)");
    metrics->callback([&] { run = [&] { return run_metrics(g, ma); }; });

    ExplainArgs ea;
    auto* explain = app.add_subcommand("explain", "Compute attribution heatmaps");
    explain->add_option("--classifier", ea.classifier, "Classifier spec")->required();
    explain->add_option("videos", ea.videos, "Video .npy files")->required();
    explain->add_option("--out-dir", ea.out_dir, "Output directory")->required();
    ea.method_opt = explain->add_option("--method", ea.method, "sensitivity, gradxinput, smoothgrad or intgrad");
    ea.samples_opt = explain->add_option("--samples", ea.samples, "SmoothGrad samples");
    ea.noise_opt = explain->add_option("--noise-scale", ea.noise_scale, "SmoothGrad noise level");
    ea.steps_opt = explain->add_option("--steps", ea.steps, "Integrated-gradient steps");
    explain->add_option("--baseline", ea.baseline, "Integrated-gradient baseline video (black when omitted)");
    explain->callback([&] { run = [&] { return run_explain(g, ea); }; });

    DeletionArgs da;
    auto* deletion = app.add_subcommand("deletion", "Deletion curve of one heatmap");
    deletion->add_option("--classifier", da.classifier, "Classifier spec")->required();
    deletion->add_option("--video", da.video, "Video .npy")->required();
    deletion->add_option("--heatmap", da.heatmap, "Heatmap .npy")->required();
    da.bins_opt = deletion->add_option("--bins", da.bins, "Relevance bins");
    deletion->add_flag("--normalize", da.normalize, "Normalize a raw attribution to unit mass");
    deletion->add_option("--out", da.out, "Output path (stdout when omitted)");
    deletion->callback([&] { run = [&] { return run_deletion(g, da); }; });

    PartswapArgs pa;
    auto* partswap = app.add_subcommand("partswap", "Build part-swapped samples from aligned pairs");
    partswap->add_option("--manifest", pa.manifest, "Sample manifest JSON")->required();
    partswap->add_option("--out-dir", pa.out_dir, "Output directory")->required();
    pa.parts_opt = partswap->add_option("--parts", pa.parts, "Parts to swap");
    partswap->callback([&] { run = [&] { return run_partswap(g, pa); }; });

    VisualizeArgs va;
    auto* visualize = app.add_subcommand("visualize", "Render heatmap overlays as PNG");
    visualize->add_option("--video", va.video, "Video .npy")->required();
    visualize->add_option("--heatmap", va.heatmap, "Heatmap .npy")->required();
    visualize->add_option("--out-dir", va.out_dir, "Output directory")->required();
    va.modes_opt = visualize->add_option("--mode", va.modes, "enhanced, gaussian, blobs or semantic (repeatable)");
    visualize->add_option("--mask", va.mask, "Part-label mask for the semantic mode");
    visualize->add_option("--frames", va.frames, "Frame range a:b (half-open) or a single frame");
    visualize->add_flag("--normalize", va.normalize, "Normalize a raw attribution to unit mass");
    va.alpha_opt = visualize->add_option("--alpha", va.alpha, "Overlay opacity");
    va.clip_opt = visualize->add_option("--clip-percentile", va.clip_percentile, "Enhance clip percentile");
    va.smooth_opt = visualize->add_option("--smooth-std", va.smooth_std, "Enhance smoothing std");
    va.n_std_opt = visualize->add_option("--n-std", va.n_std, "Ellipse size in standard deviations");
    va.scales_opt = visualize->add_option("--scales", va.scales, "Blob scale ladder");
    va.threshold_opt = visualize->add_option("--threshold", va.threshold, "Blob threshold");
    va.colormap_opt = visualize->add_option("--colormap", va.colormap, "Colormap");
    visualize->callback([&] { run = [&] { return run_visualize(g, va); }; });

    FixturesArgs fa;
    auto* fixtures = app.add_subcommand("fixtures", "Write synthetic demo data");
    fixtures->add_option("--out-dir", fa.out_dir, "Output directory")->required();
    fixtures->add_option("--frames", fa.frames, "Frames");
    fixtures->add_option("--rows", fa.rows, "Rows");
    fixtures->add_option("--cols", fa.cols, "Columns");
    fixtures->callback([&] { run = [&] { return run_fixtures(g, fa); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        return run();
    } catch (const Failure& f) {
        std::cerr << "heatmetrics: error: " << f.what() << "\n";
        return f.code();
    } catch (const std::exception& e) {
        std::string msg;
        const int code = classify(std::current_exception(), msg);
        std::cerr << "heatmetrics: error: " << msg << "\n";
        return code;
    }
}
