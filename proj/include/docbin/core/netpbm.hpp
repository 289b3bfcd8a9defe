#ifndef DOCBIN_CORE_NETPBM_HPP
#define DOCBIN_CORE_NETPBM_HPP

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "docbin/core/error.hpp"
#include "docbin/core/image.hpp"

namespace docbin {

namespace detail {

class HeaderReader {
public:
    explicit HeaderReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    int next_int(const char* field) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw Error(ErrorCode::corrupt_header, std::string("expected ") + field);
        }
        long long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_++] - '0');
            if (v > (1 << 24)) throw Error(ErrorCode::corrupt_header, std::string(field) + " out of range");
        }
        return static_cast<int>(v);
    }

    // Exactly one whitespace byte separates maxval from the raster.
    void single_space() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw Error(ErrorCode::corrupt_header, "missing separator before raster data");
        }
        ++pos_;
    }

    std::size_t pos() const { return pos_; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 2;
};

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::unreadable_file, path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

/// Encodes a raster as binary PGM (P5) or PPM (P6) with maxval 255.
inline std::vector<std::uint8_t> encode_netpbm(const RasterImage& img) {
    if (!img.valid()) throw Error(ErrorCode::invalid_argument, "invalid raster");
    const std::string header = std::string(img.channels == 1 ? "P5" : "P6") + "\n" + std::to_string(img.width) +
                               " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.data.begin(), img.data.end());
    return out;
}

inline RasterImage decode_netpbm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P') throw Error(ErrorCode::unsupported_format, "not a netpbm file");
    int channels = 0;
    if (bytes[1] == '5') {
        channels = 1;
    } else if (bytes[1] == '6') {
        channels = 3;
    } else {
        throw Error(ErrorCode::unsupported_format, std::string("netpbm variant P") + char(bytes[1]));
    }
    detail::HeaderReader hr(bytes);
    const int w = hr.next_int("width");
    const int h = hr.next_int("height");
    const int maxval = hr.next_int("maxval");
    if (w < 1 || h < 1) throw Error(ErrorCode::corrupt_header, "zero image dimension");
    if (maxval < 1) throw Error(ErrorCode::corrupt_header, "maxval must be positive");
    if (maxval > 255) throw Error(ErrorCode::unsupported_format, "16-bit samples are not supported");
    hr.single_space();

    RasterImage img(w, h, channels);
    const std::size_t need = img.data.size();
    if (bytes.size() - hr.pos() < need) {
        throw Error(ErrorCode::truncated_data, "expected " + std::to_string(need) + " sample bytes, found " +
                                                   std::to_string(bytes.size() - hr.pos()));
    }
    for (std::size_t i = 0; i < need; ++i) {
        const int v = bytes[hr.pos() + i];
        if (v > maxval) throw Error(ErrorCode::truncated_data, "sample exceeds maxval");
        img.data[i] = maxval == 255 ? static_cast<std::uint8_t>(v)
                                    : static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
    }
    return img;
}

inline RasterImage load_image(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorCode::unreadable_file, path.string());
    const auto bytes = detail::read_bytes(path);
    try {
        return decode_netpbm(bytes);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::unwritable_path, path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::unwritable_path, path.string());
}

inline void save_image(const RasterImage& img, const std::filesystem::path& path) {
    write_bytes(path, encode_netpbm(img));
}

inline BinaryImage load_binary(const std::filesystem::path& path) { return to_binary(load_image(path)); }

inline void save_binary(const BinaryImage& b, const std::filesystem::path& path) { save_image(to_raster(b), path); }

}  // namespace docbin

#endif  // DOCBIN_CORE_NETPBM_HPP
