#pragma once

#include "heatmetrics/manipulation.hpp"
#include "heatmetrics/postviz.hpp"
#include "heatmetrics/tensor.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace heatmetrics {

/// 8-bit RGB image, row-major, 3 bytes per pixel.
struct Raster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> rgb;

    Raster() = default;
    Raster(std::size_t w, std::size_t h) : width(w), height(h), rgb(w * h * 3, 0) {}

    void set(std::size_t x, std::size_t y, const std::array<std::uint8_t, 3>& c) {
        std::copy(c.begin(), c.end(), rgb.begin() + static_cast<std::ptrdiff_t>((y * width + x) * 3));
    }

    friend bool operator==(const Raster&, const Raster&) = default;
};

using Rgb = std::array<double, 3>;

/// Ten evenly spaced stops of the viridis ramp, interpolated linearly.
inline constexpr std::array<std::array<std::uint8_t, 3>, 10> kViridisStops = {{
    {0x44, 0x01, 0x54},
    {0x48, 0x28, 0x78},
    {0x3E, 0x49, 0x89},
    {0x31, 0x68, 0x8E},
    {0x26, 0x82, 0x8E},
    {0x1F, 0x9E, 0x89},
    {0x35, 0xB7, 0x79},
    {0x6D, 0xCD, 0x59},
    {0xB4, 0xDE, 0x2C},
    {0xFD, 0xE7, 0x25},
}};

/// Colormap lookup for x in [0,1]. Only "viridis" is shipped.
[[nodiscard]] inline Rgb colormap(std::string_view name, double x) {
    if (name != "viridis") throw InvalidArgument("unknown colormap '" + std::string(name) + "'");
    x = std::clamp(std::isfinite(x) ? x : 0.0, 0.0, 1.0);
    const double pos = x * double(kViridisStops.size() - 1);
    const auto lo = std::min(static_cast<std::size_t>(pos), kViridisStops.size() - 2);
    const double frac = pos - double(lo);
    Rgb out;
    for (std::size_t k = 0; k < 3; ++k) {
        out[k] = ((1.0 - frac) * kViridisStops[lo][k] + frac * kViridisStops[lo + 1][k]) / 255.0;
    }
    return out;
}

[[nodiscard]] inline std::uint8_t to_byte(double x) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0));
}

struct SemanticOverlay {
    PartRelevance relevance;
    PartMask parts;
};

using OverlayArtifact = std::variant<Heatmap, EllipseOverlay, BlobSet, SemanticOverlay>;

/// Names accepted by the CLI for each artifact kind.
enum class VizMode { enhanced, gaussian, blobs, semantic };

[[nodiscard]] inline VizMode parse_viz_mode(std::string_view s) {
    if (s == "enhanced") return VizMode::enhanced;
    if (s == "gaussian") return VizMode::gaussian;
    if (s == "blobs") return VizMode::blobs;
    if (s == "semantic") return VizMode::semantic;
    throw InvalidArgument("unknown visualization mode '" + std::string(s) + "'");
}

[[nodiscard]] inline std::string_view viz_mode_name(VizMode m) {
    switch (m) {
        case VizMode::enhanced: return "enhanced";
        case VizMode::gaussian: return "gaussian";
        case VizMode::blobs: return "blobs";
        case VizMode::semantic: return "semantic";
    }
    return "unknown";
}

struct RenderOptions {
    double alpha = 0.5;
    std::string colormap = "viridis";
    std::array<std::uint8_t, 3> outline = {255, 32, 32};
};

namespace detail {

inline std::vector<Rgb> frame_rgb(const Video& v, std::size_t frame) {
    const Grid& g = v.grid();
    std::vector<Rgb> out(g.frame_size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto px = v.array().pixel(frame * g.frame_size() + i);
        out[i] = v.channels() == 1 ? Rgb{px[0], px[0], px[0]} : Rgb{px[0], px[1], px[2]};
    }
    return out;
}

inline Raster to_raster(const std::vector<Rgb>& px, std::size_t width, std::size_t height) {
    Raster r(width, height);
    for (std::size_t i = 0; i < px.size(); ++i)
        for (std::size_t k = 0; k < 3; ++k) r.rgb[i * 3 + k] = to_byte(px[i][k]);
    return r;
}

inline void blend(std::vector<Rgb>& px, std::size_t i, const Rgb& c, double alpha) {
    for (std::size_t k = 0; k < 3; ++k) px[i][k] = (1.0 - alpha) * px[i][k] + alpha * c[k];
}

inline void plot(Raster& r, double x, double y, const std::array<std::uint8_t, 3>& c) {
    const long xi = std::lround(x), yi = std::lround(y);
    if (xi < 0 || yi < 0 || xi >= long(r.width) || yi >= long(r.height)) return;
    r.set(std::size_t(xi), std::size_t(yi), c);
}

/// Outline of an ellipse centred at (cx, cy) with half-axes a along angle
/// theta and b perpendicular to it.
inline void draw_ellipse(Raster& r, double cx, double cy, double a, double b, double theta,
                         const std::array<std::uint8_t, 3>& c) {
    const double perimeter = 2.0 * std::numbers::pi * std::max(a, b);
    const auto samples = std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(perimeter * 2.0)));
    const double ct = std::cos(theta), st = std::sin(theta);
    for (std::size_t i = 0; i < samples; ++i) {
        const double phi = 2.0 * std::numbers::pi * double(i) / double(samples);
        const double ex = a * std::cos(phi), ey = b * std::sin(phi);
        plot(r, cx + ex * ct - ey * st, cy + ex * st + ey * ct, c);
    }
    plot(r, cx, cy, c);
}

}  // namespace detail

/// Draws one frame of `v` with the artifact overlaid. Output is a pure
/// function of the inputs.
[[nodiscard]] inline Raster render_overlay(const Video& v, const OverlayArtifact& artifact,
                                           std::size_t frame, const RenderOptions& opt = {}) {
    const Grid& g = v.grid();
    if (frame >= g.frames()) {
        throw OutOfGrid("frame " + std::to_string(frame) + " out of range, clip has " +
                        std::to_string(g.frames()) + " frame(s)");
    }
    if (!(opt.alpha >= 0.0 && opt.alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0,1]");
    std::vector<Rgb> px = detail::frame_rgb(v, frame);
    const std::size_t fs = g.frame_size();

    return std::visit(
        [&](const auto& a) -> Raster {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, Heatmap>) {
                require_same_grid(g, a.grid(), "render_overlay(heatmap)");
                double peak = 0.0;
                for (std::size_t i = 0; i < fs; ++i) peak = std::max(peak, a[frame * fs + i]);
                for (std::size_t i = 0; i < fs; ++i) {
                    const double x = peak > 0.0 ? a[frame * fs + i] / peak : 0.0;
                    detail::blend(px, i, colormap(opt.colormap, x), opt.alpha);
                }
                return detail::to_raster(px, g.cols(), g.rows());
            } else if constexpr (std::is_same_v<T, EllipseOverlay>) {
                Raster r = detail::to_raster(px, g.cols(), g.rows());
                for (const FrameEllipse& e : a.frames) {
                    if (e.frame != frame) continue;
                    detail::draw_ellipse(r, e.center_w, e.center_u, e.axis_major, e.axis_minor,
                                         e.orientation, opt.outline);
                }
                return r;
            } else if constexpr (std::is_same_v<T, BlobSet>) {
                double top = 0.0;
                for (const Blob& b : a.blobs) top = std::max(top, b.score);
                Raster r = detail::to_raster(px, g.cols(), g.rows());
                for (const Blob& b : a.blobs) {
                    if (b.frame != frame) continue;
                    const Rgb c = colormap(opt.colormap, top > 0.0 ? b.score / top : 0.0);
                    const double radius = std::numbers::sqrt2 * b.scale;
                    detail::draw_ellipse(r, double(b.w), double(b.u), radius, radius, 0.0,
                                         {to_byte(c[0]), to_byte(c[1]), to_byte(c[2])});
                }
                return r;
            } else {
                require_same_grid(g, a.parts.grid(), "render_overlay(semantic)");
                double top = 0.0;
                for (const auto& [part, mass] : a.relevance) top = std::max(top, mass);
                for (std::size_t i = 0; i < fs; ++i) {
                    const Part p = a.parts.at(frame * fs + i);
                    const auto it = a.relevance.find(p);
                    const double m = it == a.relevance.end() ? 0.0 : it->second;
                    detail::blend(px, i, colormap(opt.colormap, top > 0.0 ? m / top : 0.0),
                                  opt.alpha);
                }
                return detail::to_raster(px, g.cols(), g.rows());
            }
        },
        artifact);
}

namespace detail {

inline void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t x) {
    out.push_back(std::uint8_t(x >> 24));
    out.push_back(std::uint8_t(x >> 16));
    out.push_back(std::uint8_t(x >> 8));
    out.push_back(std::uint8_t(x));
}

inline std::uint32_t get_u32_be(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           std::uint32_t(p[3]);
}

inline void put_chunk(std::vector<std::uint8_t>& out, const char* type,
                      const std::vector<std::uint8_t>& data) {
    put_u32_be(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const uLong crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
    put_u32_be(out, static_cast<std::uint32_t>(crc));
}

inline constexpr std::array<std::uint8_t, 8> kPngSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

}  // namespace detail

/// PNG, 8-bit RGB, no interlacing, filter 0 on every row, zlib level 9.
[[nodiscard]] inline std::vector<std::uint8_t> encode_png(const Raster& r) {
    if (r.width == 0 || r.height == 0) throw InvalidArgument("cannot encode an empty raster");
    std::vector<std::uint8_t> out(detail::kPngSignature.begin(), detail::kPngSignature.end());

    std::vector<std::uint8_t> ihdr;
    detail::put_u32_be(ihdr, static_cast<std::uint32_t>(r.width));
    detail::put_u32_be(ihdr, static_cast<std::uint32_t>(r.height));
    ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});
    detail::put_chunk(out, "IHDR", ihdr);

    std::vector<std::uint8_t> scan;
    scan.reserve(r.height * (r.width * 3 + 1));
    for (std::size_t y = 0; y < r.height; ++y) {
        scan.push_back(0);
        const auto row = r.rgb.begin() + static_cast<std::ptrdiff_t>(y * r.width * 3);
        scan.insert(scan.end(), row, row + static_cast<std::ptrdiff_t>(r.width * 3));
    }
    uLongf zlen = compressBound(static_cast<uLong>(scan.size()));
    std::vector<std::uint8_t> idat(zlen);
    if (compress2(idat.data(), &zlen, scan.data(), static_cast<uLong>(scan.size()), 9) != Z_OK) {
        throw Error("zlib compression failed");
    }
    idat.resize(zlen);
    detail::put_chunk(out, "IDAT", idat);
    detail::put_chunk(out, "IEND", {});
    return out;
}

/// Decodes PNGs of the subset written by encode_png (8-bit RGB, filter 0),
/// verifying every chunk CRC.
[[nodiscard]] inline Raster decode_png(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || !std::equal(detail::kPngSignature.begin(), detail::kPngSignature.end(),
                                        bytes.begin())) {
        throw FormatError("not a PNG file");
    }
    std::size_t pos = 8;
    Raster r;
    std::vector<std::uint8_t> idat;
    bool ended = false;
    while (!ended) {
        if (pos + 12 > bytes.size()) throw FormatError("PNG chunk truncated");
        const std::uint32_t len = detail::get_u32_be(bytes.data() + pos);
        if (pos + 12 + len > bytes.size()) throw FormatError("PNG chunk truncated");
        const std::string type(reinterpret_cast<const char*>(bytes.data() + pos + 4), 4);
        const std::uint8_t* data = bytes.data() + pos + 8;
        const uLong crc = crc32(0L, bytes.data() + pos + 4, len + 4);
        if (crc != detail::get_u32_be(data + len)) throw FormatError("PNG CRC mismatch in " + type);
        if (type == "IHDR") {
            if (len != 13 || data[8] != 8 || data[9] != 2 || data[12] != 0) {
                throw FormatError("unsupported PNG layout");
            }
            r.width = detail::get_u32_be(data);
            r.height = detail::get_u32_be(data + 4);
        } else if (type == "IDAT") {
            idat.insert(idat.end(), data, data + len);
        } else if (type == "IEND") {
            ended = true;
        }
        pos += 12 + len;
    }
    std::vector<std::uint8_t> scan(r.height * (r.width * 3 + 1));
    uLongf slen = static_cast<uLongf>(scan.size());
    if (uncompress(scan.data(), &slen, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        slen != scan.size()) {
        throw FormatError("PNG image data is corrupt");
    }
    r.rgb.resize(r.width * r.height * 3);
    for (std::size_t y = 0; y < r.height; ++y) {
        const std::size_t row = y * (r.width * 3 + 1);
        if (scan[row] != 0) throw FormatError("unsupported PNG filter");
        std::copy_n(scan.begin() + static_cast<std::ptrdiff_t>(row + 1), r.width * 3,
                    r.rgb.begin() + static_cast<std::ptrdiff_t>(y * r.width * 3));
    }
    return r;
}

}  // namespace heatmetrics
