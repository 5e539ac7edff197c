#pragma once

#include "heatmetrics/tensor.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heatmetrics {

/// Face-part vocabulary. Numeric values are the labels stored in mask files.
enum class Part : std::uint8_t { background = 0, face = 1, nose = 2, mouth = 3, eyes = 4, ears = 5 };

inline constexpr std::array<Part, 6> kAllParts = {Part::background, Part::face, Part::nose,
                                                  Part::mouth,      Part::eyes, Part::ears};

/// Parts that are swapped when building manipulation-detection samples.
inline constexpr std::array<Part, 3> kSwapParts = {Part::eyes, Part::mouth, Part::nose};

[[nodiscard]] constexpr std::string_view part_name(Part p) {
    switch (p) {
        case Part::background: return "background";
        case Part::face: return "face";
        case Part::nose: return "nose";
        case Part::mouth: return "mouth";
        case Part::eyes: return "eyes";
        case Part::ears: return "ears";
    }
    return "unknown";
}

[[nodiscard]] inline std::optional<Part> parse_part(std::string_view name) {
    for (Part p : kAllParts)
        if (part_name(p) == name) return p;
    return std::nullopt;
}

[[nodiscard]] inline Part part_from_label(std::uint8_t label) {
    if (label > static_cast<std::uint8_t>(Part::ears)) {
        throw InvalidArgument("part label " + std::to_string(label) + " not in vocabulary");
    }
    return static_cast<Part>(label);
}

/// Per-pixel part labels over a grid.
class PartMask {
public:
    explicit PartMask(GridArray<std::uint8_t> labels) : labels_(std::move(labels)) {
        if (labels_.channels() != 1) throw InvalidArgument("part mask must have a single channel");
        for (std::uint8_t l : labels_.values()) (void)part_from_label(l);
    }

    [[nodiscard]] const Grid& grid() const { return labels_.grid(); }
    [[nodiscard]] const GridArray<std::uint8_t>& labels() const { return labels_; }
    [[nodiscard]] Part at(std::size_t i) const { return static_cast<Part>(labels_[i]); }

    [[nodiscard]] std::size_t count(Part p) const {
        return static_cast<std::size_t>(std::count(labels_.values().begin(), labels_.values().end(),
                                                    static_cast<std::uint8_t>(p)));
    }

private:
    GridArray<std::uint8_t> labels_;
};

/// Binary ground-truth region, values 0 or 1.
class BinaryMask {
public:
    explicit BinaryMask(GridArray<std::uint8_t> bits) : bits_(std::move(bits)) {
        if (bits_.channels() != 1) throw InvalidArgument("binary mask must have a single channel");
        for (std::uint8_t b : bits_.values()) {
            if (b > 1) throw InvalidArgument("binary mask values must be 0 or 1");
        }
    }

    [[nodiscard]] static BinaryMask of_part(const PartMask& parts, Part p) {
        GridArray<std::uint8_t> bits(parts.grid());
        for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = parts.at(i) == p ? 1 : 0;
        return BinaryMask(std::move(bits));
    }

    [[nodiscard]] const Grid& grid() const { return bits_.grid(); }
    [[nodiscard]] const GridArray<std::uint8_t>& bits() const { return bits_; }
    [[nodiscard]] bool operator[](std::size_t i) const { return bits_[i] != 0; }
    [[nodiscard]] std::size_t count() const {
        return static_cast<std::size_t>(
            std::count(bits_.values().begin(), bits_.values().end(), std::uint8_t{1}));
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    GridArray<std::uint8_t> bits_;
};

struct SwapProvenance {
    std::string real_id;
    std::string fake_id;
};

/// Composite clip whose manipulation is confined to one semantic part.
struct PartSwapSample {
    Video video;
    BinaryMask mask;
    Part part;
    SwapProvenance provenance;
};

/// Takes the fake clip's pixels where the part label equals `part` and the
/// real clip's pixels everywhere else. Alignment of the pair is the caller's
/// responsibility; only grid and channel agreement is checked.
[[nodiscard]] inline PartSwapSample part_swap(const Video& real, const Video& fake,
                                              const PartMask& parts, Part part,
                                              SwapProvenance provenance = {}) {
    require_same_grid(real.grid(), fake.grid(), "part_swap(real, fake)");
    require_same_grid(real.grid(), parts.grid(), "part_swap(video, parts)");
    if (real.channels() != fake.channels()) {
        throw GridMismatch("part_swap: real and fake channel counts differ");
    }
    BinaryMask mask = BinaryMask::of_part(parts, part);
    if (mask.count() == 0) {
        throw EmptyPart("part '" + std::string(part_name(part)) + "' occupies no pixels");
    }
    const std::size_t c = real.channels();
    GridArray<double> out = real.array();
    for (std::size_t i = 0; i < real.grid().size(); ++i) {
        if (!mask[i]) continue;
        for (std::size_t k = 0; k < c; ++k) out[i * c + k] = fake.array()[i * c + k];
    }
    return PartSwapSample{Video(std::move(out)), std::move(mask), part, std::move(provenance)};
}

/// Share of heatmap mass inside the mask.
[[nodiscard]] inline double mass_inside(const Heatmap& h, const BinaryMask& mask) {
    require_same_grid(h.grid(), mask.grid(), "mass_inside");
    double sum = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        if (mask[i]) sum += h[i];
    return sum;
}

/// Flat indices of the `k` most relevant pixels (all of them when N < k),
/// ordered by descending relevance with ties broken by ascending index.
[[nodiscard]] inline std::vector<std::size_t> top_k_pixels(const Heatmap& h, std::size_t k) {
    std::vector<std::size_t> order(h.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    k = std::min(k, order.size());
    auto more_relevant = [&](std::size_t a, std::size_t b) {
        if (h[a] != h[b]) return h[a] > h[b];
        return a < b;
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      more_relevant);
    order.resize(k);
    return order;
}

/// Fraction of the k most relevant pixels that fall inside the mask.
[[nodiscard]] inline double precision_at_k(const Heatmap& h, const BinaryMask& mask,
                                           std::size_t k = 100) {
    require_same_grid(h.grid(), mask.grid(), "precision_at_k");
    if (k == 0) throw InvalidArgument("precision_at_k requires k >= 1");
    const std::vector<std::size_t> top = top_k_pixels(h, k);
    std::size_t hits = 0;
    for (std::size_t i : top)
        if (mask[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(top.size());
}

}  // namespace heatmetrics
