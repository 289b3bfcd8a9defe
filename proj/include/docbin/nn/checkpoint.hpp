#ifndef DOCBIN_NN_CHECKPOINT_HPP
#define DOCBIN_NN_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "docbin/core/netpbm.hpp"
#include "docbin/nn/networks.hpp"

namespace docbin::nn {

// Layout:
//   docbin-checkpoint v1 <role> <tensor-count>\n
//   then per tensor: <name> <n> <c> <h> <w>\n followed by n*c*h*w
//   little-endian IEEE-754 doubles.
inline constexpr const char* kCheckpointMagic = "docbin-checkpoint";
inline constexpr int kCheckpointVersion = 1;

namespace detail {
inline void put_le(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}
inline double get_le(const std::uint8_t* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}
inline std::string read_line(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
    std::string line;
    while (pos < bytes.size() && bytes[pos] != '\n') line.push_back(static_cast<char>(bytes[pos++]));
    if (pos >= bytes.size()) throw Error(ErrorCode::corrupt_header, "checkpoint line not terminated");
    ++pos;
    return line;
}
}  // namespace detail

inline std::vector<std::uint8_t> encode_checkpoint(const NetParams& p) {
    const std::string header = std::string(kCheckpointMagic) + " v" + std::to_string(kCheckpointVersion) + " " +
                               to_string(p.role) + " " + std::to_string(p.tensors.size()) + "\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    for (std::size_t i = 0; i < p.tensors.size(); ++i) {
        const Shape& s = p.tensors[i].shape;
        const std::string line = p.names[i] + " " + std::to_string(s.n) + " " + std::to_string(s.c) + " " +
                                 std::to_string(s.h) + " " + std::to_string(s.w) + "\n";
        out.insert(out.end(), line.begin(), line.end());
        for (double v : p.tensors[i].data) detail::put_le(out, v);
    }
    return out;
}

inline NetParams decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    std::size_t pos = 0;
    std::istringstream head(detail::read_line(bytes, pos));
    std::string magic, version, role;
    std::size_t count = 0;
    if (!(head >> magic >> version >> role >> count) || magic != kCheckpointMagic) {
        throw Error(ErrorCode::corrupt_header, "not a docbin checkpoint");
    }
    if (version != "v" + std::to_string(kCheckpointVersion)) {
        throw Error(ErrorCode::unsupported_format, "checkpoint version " + version);
    }
    NetParams p;
    if (role == "generator") {
        p.role = NetRole::generator;
    } else if (role == "discriminator") {
        p.role = NetRole::discriminator;
    } else {
        throw Error(ErrorCode::corrupt_header, "unknown role " + role);
    }
    for (std::size_t i = 0; i < count; ++i) {
        std::istringstream line(detail::read_line(bytes, pos));
        std::string name;
        Shape s;
        if (!(line >> name >> s.n >> s.c >> s.h >> s.w)) throw Error(ErrorCode::corrupt_header, "bad tensor header");
        Tensor t(s);
        if (bytes.size() - pos < 8 * t.numel()) throw Error(ErrorCode::truncated_data, "tensor " + name);
        for (double& v : t.data) {
            v = detail::get_le(bytes.data() + pos);
            pos += 8;
        }
        p.add(std::move(name), std::move(t));
    }
    if (pos != bytes.size()) throw Error(ErrorCode::corrupt_header, "trailing bytes after last tensor");
    return p;
}

inline void save_checkpoint(const NetParams& p, const std::filesystem::path& path) {
    write_bytes(path, encode_checkpoint(p));
}

inline NetParams load_checkpoint(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorCode::missing_file, path.string());
    return decode_checkpoint(docbin::detail::read_bytes(path));
}

}  // namespace docbin::nn

#endif  // DOCBIN_NN_CHECKPOINT_HPP
