#pragma once

// Reader and writer for the NumPy .npy container (version 1.0) and for
// .npz zip bundles of such arrays.

#include "heatmetrics/error.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace heatmetrics {

static_assert(std::endian::native == std::endian::little,
              "array payloads are read and written as host-order little-endian");

enum class Dtype { float32, float64, uint8 };

[[nodiscard]] constexpr std::size_t dtype_size(Dtype d) {
    switch (d) {
        case Dtype::float32: return 4;
        case Dtype::float64: return 8;
        case Dtype::uint8: return 1;
    }
    return 0;
}

[[nodiscard]] constexpr std::string_view dtype_descr(Dtype d) {
    switch (d) {
        case Dtype::float32: return "<f4";
        case Dtype::float64: return "<f8";
        case Dtype::uint8: return "|u1";
    }
    return "";
}

template <typename T>
constexpr Dtype dtype_of() {
    if constexpr (std::is_same_v<T, float>) return Dtype::float32;
    else if constexpr (std::is_same_v<T, double>) return Dtype::float64;
    else if constexpr (std::is_same_v<T, std::uint8_t>) return Dtype::uint8;
    else static_assert(sizeof(T) == 0, "unsupported element type");
}

/// A typed dense row-major array as stored in a .npy file.
struct NpyArray {
    Dtype dtype = Dtype::float64;
    std::vector<std::size_t> shape;
    std::vector<std::uint8_t> payload;

    [[nodiscard]] std::size_t element_count() const {
        std::size_t n = 1;
        for (std::size_t s : shape) n *= s;
        return n;
    }

    template <typename T>
    [[nodiscard]] static NpyArray from(std::vector<std::size_t> shape, std::span<const T> values) {
        NpyArray a;
        a.dtype = dtype_of<T>();
        a.shape = std::move(shape);
        if (a.element_count() != values.size()) {
            throw InvalidArgument("array shape does not match the number of values");
        }
        a.payload.resize(values.size_bytes());
        if (!values.empty()) std::memcpy(a.payload.data(), values.data(), values.size_bytes());
        return a;
    }

    /// Elements in their stored type; throws UnsupportedDtype on a type mismatch.
    template <typename T>
    [[nodiscard]] std::vector<T> values() const {
        if (dtype != dtype_of<T>()) {
            throw UnsupportedDtype("array holds " + std::string(dtype_descr(dtype)) + ", requested " +
                                   std::string(dtype_descr(dtype_of<T>())));
        }
        std::vector<T> out(element_count());
        if (!out.empty()) std::memcpy(out.data(), payload.data(), payload.size());
        return out;
    }

    /// Elements converted to double without rescaling.
    [[nodiscard]] std::vector<double> as_doubles() const {
        switch (dtype) {
            case Dtype::float32: {
                auto v = values<float>();
                return {v.begin(), v.end()};
            }
            case Dtype::float64: return values<double>();
            case Dtype::uint8: {
                auto v = values<std::uint8_t>();
                return {v.begin(), v.end()};
            }
        }
        return {};
    }

    friend bool operator==(const NpyArray&, const NpyArray&) = default;
};

namespace detail {

/// Minimal parser for the Python-literal dictionary in a .npy header.
class HeaderParser {
public:
    explicit HeaderParser(std::string_view text) : s_(text) {}

    void parse(std::string& descr, bool& fortran, std::vector<std::size_t>& shape) {
        bool have_descr = false, have_fortran = false, have_shape = false;
        expect('{');
        while (true) {
            skip_ws();
            if (peek() == '}') {
                ++pos_;
                break;
            }
            const std::string key = string_literal();
            expect(':');
            if (key == "descr") {
                descr = string_literal();
                have_descr = true;
            } else if (key == "fortran_order") {
                fortran = boolean();
                have_fortran = true;
            } else if (key == "shape") {
                shape = tuple();
                have_shape = true;
            } else {
                throw MalformedHeader("unexpected header key '" + key + "'");
            }
            skip_ws();
            if (peek() == ',') ++pos_;
        }
        if (!have_descr || !have_fortran || !have_shape) {
            throw MalformedHeader("header must define descr, fortran_order and shape");
        }
    }

private:
    char peek() const {
        if (pos_ >= s_.size()) throw MalformedHeader("header ends unexpectedly");
        return s_[pos_];
    }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    void expect(char c) {
        skip_ws();
        if (peek() != c) throw MalformedHeader(std::string("expected '") + c + "' in header");
        ++pos_;
    }
    std::string string_literal() {
        skip_ws();
        const char q = peek();
        if (q != '\'' && q != '"') throw MalformedHeader("expected a quoted string in header");
        const std::size_t end = s_.find(q, pos_ + 1);
        if (end == std::string_view::npos) throw MalformedHeader("unterminated string in header");
        std::string out(s_.substr(pos_ + 1, end - pos_ - 1));
        pos_ = end + 1;
        return out;
    }
    bool boolean() {
        skip_ws();
        if (s_.substr(pos_, 4) == "True") {
            pos_ += 4;
            return true;
        }
        if (s_.substr(pos_, 5) == "False") {
            pos_ += 5;
            return false;
        }
        throw MalformedHeader("expected True or False in header");
    }
    std::vector<std::size_t> tuple() {
        expect('(');
        std::vector<std::size_t> out;
        while (true) {
            skip_ws();
            if (peek() == ')') {
                ++pos_;
                return out;
            }
            if (!std::isdigit(static_cast<unsigned char>(peek()))) {
                throw MalformedHeader("shape entries must be nonnegative integers");
            }
            std::size_t v = 0;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                v = v * 10 + std::size_t(s_[pos_] - '0');
                ++pos_;
            }
            out.push_back(v);
            skip_ws();
            if (peek() == ',') ++pos_;
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
    return bytes;
}

}  // namespace detail

inline constexpr std::string_view kNpyMagic = "\x93NUMPY";

/// Serializes to .npy version 1.0 with the header laid out exactly as NumPy
/// writes it (sorted keys, spare room for growing the first axis, space
/// padding to a 64-byte boundary, trailing newline).
[[nodiscard]] inline std::vector<std::uint8_t> encode_npy(const NpyArray& a) {
    if (a.shape.empty()) throw InvalidArgument("arrays must have rank >= 1");
    if (a.payload.size() != a.element_count() * dtype_size(a.dtype)) {
        throw InvalidArgument("payload size does not match shape and dtype");
    }
    std::string shape = "(";
    for (std::size_t i = 0; i < a.shape.size(); ++i) {
        if (i) shape += ", ";
        shape += std::to_string(a.shape[i]);
    }
    shape += a.shape.size() == 1 ? ",)" : ")";
    std::string header = "{'descr': '" + std::string(dtype_descr(a.dtype)) +
                         "', 'fortran_order': False, 'shape': " + shape + ", }";
    constexpr std::size_t kGrowthDigits = 21;
    const std::size_t first = std::to_string(a.shape[0]).size();
    if (first < kGrowthDigits) header.append(kGrowthDigits - first, ' ');
    const std::size_t unpadded = kNpyMagic.size() + 2 + 2 + header.size() + 1;
    header.append(64 - unpadded % 64, ' ');
    header.push_back('\n');
    if (header.size() > 0xFFFF) throw InvalidArgument("array header too large for format 1.0");

    std::vector<std::uint8_t> out(kNpyMagic.begin(), kNpyMagic.end());
    out.push_back(1);
    out.push_back(0);
    out.push_back(std::uint8_t(header.size() & 0xFF));
    out.push_back(std::uint8_t(header.size() >> 8));
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), a.payload.begin(), a.payload.end());
    return out;
}

[[nodiscard]] inline NpyArray decode_npy(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kNpyMagic.size() ||
        !std::equal(kNpyMagic.begin(), kNpyMagic.end(), bytes.begin(),
                    [](char c, std::uint8_t b) { return std::uint8_t(c) == b; })) {
        throw BadMagic("missing \\x93NUMPY magic");
    }
    if (bytes.size() < 10) throw MalformedHeader("file ends inside the preamble");
    if (bytes[6] != 1 || bytes[7] != 0) {
        throw UnsupportedVersion("format version " + std::to_string(bytes[6]) + "." +
                                 std::to_string(bytes[7]) + " is not supported, only 1.0");
    }
    const std::size_t header_len = std::size_t(bytes[8]) | (std::size_t(bytes[9]) << 8);
    if (bytes.size() < 10 + header_len) throw MalformedHeader("file ends inside the header");
    const std::string_view text(reinterpret_cast<const char*>(bytes.data() + 10), header_len);

    std::string descr;
    bool fortran = false;
    NpyArray a;
    detail::HeaderParser(text).parse(descr, fortran, a.shape);
    if (descr == "<f8") a.dtype = Dtype::float64;
    else if (descr == "<f4") a.dtype = Dtype::float32;
    else if (descr == "|u1" || descr == "<u1") a.dtype = Dtype::uint8;
    else throw UnsupportedDtype("dtype '" + descr + "' is not supported");
    if (fortran) throw FortranOrderUnsupported("column-major (fortran_order) arrays are rejected");
    if (a.shape.empty()) throw MalformedHeader("arrays must have rank >= 1");

    const std::size_t need = a.element_count() * dtype_size(a.dtype);
    const std::size_t have = bytes.size() - 10 - header_len;
    if (have < need) {
        throw TruncatedPayload("payload has " + std::to_string(have) + " bytes, shape needs " +
                               std::to_string(need));
    }
    if (have > need) throw MalformedHeader("unexpected bytes after the payload");
    a.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(10 + header_len), bytes.end());
    return a;
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

inline void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
    write_file_atomic(path, std::span<const std::uint8_t>(
                                reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

[[nodiscard]] inline NpyArray read_array(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file '" + path.string() + "'");
    return decode_npy(detail::read_file(path));
}

inline void write_array(const NpyArray& a, const std::filesystem::path& path) {
    write_file_atomic(path, encode_npy(a));
}

namespace detail {

inline void put_le16(std::vector<std::uint8_t>& o, std::uint16_t v) {
    o.push_back(std::uint8_t(v));
    o.push_back(std::uint8_t(v >> 8));
}
inline void put_le32(std::vector<std::uint8_t>& o, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) o.push_back(std::uint8_t(v >> (8 * i)));
}
inline std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
    if (at + 2 > b.size()) throw FormatError("zip structure truncated");
    return std::uint16_t(b[at] | (b[at + 1] << 8));
}
inline std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
    if (at + 4 > b.size()) throw FormatError("zip structure truncated");
    return std::uint32_t(b[at]) | (std::uint32_t(b[at + 1]) << 8) | (std::uint32_t(b[at + 2]) << 16) |
           (std::uint32_t(b[at + 3]) << 24);
}
inline std::uint64_t le64(std::span<const std::uint8_t> b, std::size_t at) {
    return std::uint64_t(le32(b, at)) | (std::uint64_t(le32(b, at + 4)) << 32);
}

inline std::vector<std::uint8_t> inflate_raw(std::span<const std::uint8_t> in, std::size_t out_size) {
    std::vector<std::uint8_t> out(out_size);
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error("zlib inflateInit2 failed");
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    const std::size_t produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != out_size) throw FormatError("corrupt deflate stream in zip entry");
    return out;
}

}  // namespace detail

/// Named arrays of a .npz bundle; names exclude the ".npy" suffix.
using NpzBundle = std::map<std::string, NpyArray>;

/// Zip archive with one stored (uncompressed) .npy entry per array.
[[nodiscard]] inline std::vector<std::uint8_t> encode_npz(const NpzBundle& bundle) {
    constexpr std::uint16_t kDosDate = 0x0021;  // 1980-01-01
    std::vector<std::uint8_t> out, central;
    for (const auto& [name, array] : bundle) {
        const std::string entry = name + ".npy";
        const std::vector<std::uint8_t> data = encode_npy(array);
        if (data.size() > 0xFFFFFFFEu || out.size() > 0xFFFFFFFEu) {
            throw InvalidArgument("npz entries above 4 GiB are not supported");
        }
        const auto crc = static_cast<std::uint32_t>(crc32(0L, data.data(), static_cast<uInt>(data.size())));
        const auto offset = static_cast<std::uint32_t>(out.size());
        const auto size = static_cast<std::uint32_t>(data.size());

        detail::put_le32(out, 0x04034b50);
        detail::put_le16(out, 20);
        detail::put_le16(out, 0);
        detail::put_le16(out, 0);
        detail::put_le16(out, 0);
        detail::put_le16(out, kDosDate);
        detail::put_le32(out, crc);
        detail::put_le32(out, size);
        detail::put_le32(out, size);
        detail::put_le16(out, static_cast<std::uint16_t>(entry.size()));
        detail::put_le16(out, 0);
        out.insert(out.end(), entry.begin(), entry.end());
        out.insert(out.end(), data.begin(), data.end());

        detail::put_le32(central, 0x02014b50);
        detail::put_le16(central, 20);
        detail::put_le16(central, 20);
        detail::put_le16(central, 0);
        detail::put_le16(central, 0);
        detail::put_le16(central, 0);
        detail::put_le16(central, kDosDate);
        detail::put_le32(central, crc);
        detail::put_le32(central, size);
        detail::put_le32(central, size);
        detail::put_le16(central, static_cast<std::uint16_t>(entry.size()));
        detail::put_le16(central, 0);
        detail::put_le16(central, 0);
        detail::put_le16(central, 0);
        detail::put_le16(central, 0);
        detail::put_le32(central, 0);
        detail::put_le32(central, offset);
        central.insert(central.end(), entry.begin(), entry.end());
    }
    const auto cd_offset = static_cast<std::uint32_t>(out.size());
    out.insert(out.end(), central.begin(), central.end());
    detail::put_le32(out, 0x06054b50);
    detail::put_le16(out, 0);
    detail::put_le16(out, 0);
    detail::put_le16(out, static_cast<std::uint16_t>(bundle.size()));
    detail::put_le16(out, static_cast<std::uint16_t>(bundle.size()));
    detail::put_le32(out, static_cast<std::uint32_t>(central.size()));
    detail::put_le32(out, cd_offset);
    detail::put_le16(out, 0);
    return out;
}

/// Reads stored or deflated entries. Every entry must be a .npy array.
[[nodiscard]] inline NpzBundle decode_npz(std::span<const std::uint8_t> b) {
    if (b.size() < 22) throw BadMagic("not a zip archive");
    std::size_t eocd = std::string::npos;
    const std::size_t scan_floor = b.size() > 22 + 0xFFFF ? b.size() - 22 - 0xFFFF : 0;
    for (std::size_t at = b.size() - 22 + 1; at-- > scan_floor;) {
        if (detail::le32(b, at) == 0x06054b50) {
            eocd = at;
            break;
        }
    }
    if (eocd == std::string::npos) throw BadMagic("zip end-of-central-directory record not found");
    const std::size_t entries = detail::le16(b, eocd + 10);
    std::size_t at = detail::le32(b, eocd + 16);

    NpzBundle bundle;
    for (std::size_t e = 0; e < entries; ++e) {
        if (detail::le32(b, at) != 0x02014b50) throw FormatError("bad zip central directory entry");
        const std::uint16_t method = detail::le16(b, at + 10);
        const std::uint32_t crc = detail::le32(b, at + 16);
        std::uint64_t csize = detail::le32(b, at + 20);
        std::uint64_t usize = detail::le32(b, at + 24);
        const std::uint16_t name_len = detail::le16(b, at + 28);
        const std::uint16_t extra_len = detail::le16(b, at + 30);
        const std::uint16_t comment_len = detail::le16(b, at + 32);
        std::uint64_t local = detail::le32(b, at + 42);
        if (at + 46 + name_len > b.size()) throw FormatError("zip structure truncated");
        std::string name(reinterpret_cast<const char*>(b.data() + at + 46), name_len);

        // Zip64 extended information replaces saturated 32-bit fields, in order.
        std::size_t x = at + 46 + name_len;
        const std::size_t x_end = x + extra_len;
        while (x + 4 <= x_end) {
            const std::uint16_t id = detail::le16(b, x);
            const std::uint16_t len = detail::le16(b, x + 2);
            if (id == 0x0001) {
                std::size_t f = x + 4;
                if (usize == 0xFFFFFFFFu) { usize = detail::le64(b, f); f += 8; }
                if (csize == 0xFFFFFFFFu) { csize = detail::le64(b, f); f += 8; }
                if (local == 0xFFFFFFFFu) { local = detail::le64(b, f); }
            }
            x += 4 + len;
        }
        at = x_end + comment_len;

        if (detail::le32(b, local) != 0x04034b50) throw FormatError("bad zip local header for " + name);
        const std::size_t data_at = local + 30 + detail::le16(b, local + 26) + detail::le16(b, local + 28);
        if (data_at + csize > b.size()) throw TruncatedPayload("zip entry '" + name + "' is truncated");
        const auto raw = b.subspan(data_at, csize);
        std::vector<std::uint8_t> data;
        if (method == 0) {
            if (csize != usize) throw FormatError("stored zip entry sizes disagree for " + name);
            data.assign(raw.begin(), raw.end());
        } else if (method == 8) {
            data = detail::inflate_raw(raw, usize);
        } else {
            throw FormatError("zip compression method " + std::to_string(method) + " not supported");
        }
        if (crc32(0L, data.data(), static_cast<uInt>(data.size())) != crc) {
            throw FormatError("CRC mismatch in zip entry " + name);
        }
        if (name.size() > 4 && name.ends_with(".npy")) name.resize(name.size() - 4);
        bundle.emplace(std::move(name), decode_npy(data));
    }
    return bundle;
}

[[nodiscard]] inline NpzBundle read_npz(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file '" + path.string() + "'");
    return decode_npz(detail::read_file(path));
}

inline void write_npz(const NpzBundle& bundle, const std::filesystem::path& path) {
    write_file_atomic(path, encode_npz(bundle));
}

}  // namespace heatmetrics
