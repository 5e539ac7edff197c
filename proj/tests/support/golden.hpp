#pragma once

// The pinned rendering fixture behind the golden PNGs in data/golden.
// Set HEATMETRICS_REGEN_GOLDEN=1 to rewrite missing or stale files.

#include "heatmetrics/heatmetrics.hpp"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

namespace golden {

using namespace heatmetrics;

struct Fixture {
    Video video;
    Heatmap heatmap;
    PartMask parts;
};

inline Fixture pinned_fixture() {
    const Grid g(2, 24, 32);
    namespace fx = heatmetrics::fixtures;
    Video video = fx::make_video({.kind = fx::Pattern::random, .grid = g, .level = 0.1, .high = 0.6, .seed = 2024});
    Heatmap heatmap = fx::make_heatmap(
        {.kind = fx::Pattern::gaussian_blob, .grid = g, .center = {1.0, 14.0, 12.0}, .std = 3.0, .temporal_std = 0.8});
    return {std::move(video), std::move(heatmap), fx::face_layout(g)};
}

inline OverlayArtifact artifact_for(const Fixture& f, VizMode mode) {
    switch (mode) {
        case VizMode::enhanced: return enhance(f.heatmap);
        case VizMode::gaussian: return gaussian_match(f.heatmap);
        case VizMode::blobs: return detect_blobs(f.heatmap);
        case VizMode::semantic: return SemanticOverlay{semantic_aggregate(f.heatmap, f.parts), f.parts};
    }
    throw InvalidArgument("unknown mode");
}

inline std::vector<std::uint8_t> render(VizMode mode, std::size_t frame = 1) {
    const Fixture f = pinned_fixture();
    return encode_png(render_overlay(f.video, artifact_for(f, mode), frame));
}

inline std::filesystem::path golden_path(const std::filesystem::path& data_dir, VizMode mode) {
    return data_dir / "golden" / (std::string(viz_mode_name(mode)) + ".png");
}

inline bool regenerate_requested() {
    const char* env = std::getenv("HEATMETRICS_REGEN_GOLDEN");
    return env != nullptr && std::string(env) == "1";
}

}  // namespace golden
