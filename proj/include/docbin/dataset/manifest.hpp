#ifndef DOCBIN_DATASET_MANIFEST_HPP
#define DOCBIN_DATASET_MANIFEST_HPP

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "docbin/core/netpbm.hpp"
#include "docbin/core/random.hpp"
#include "docbin/dataset/patches.hpp"

namespace docbin {

struct SourceCounts {
    std::size_t patches = 0;
    std::size_t globals = 0;
    friend bool operator==(const SourceCounts&, const SourceCounts&) = default;
};

/// Augmented training set with provenance. On disk it is a directory holding
/// `manifest.txt` (one tab-separated record per line) plus PGM/PPM payloads
/// referenced by relative path and guarded by FNV-1a checksums.
struct Manifest {
    std::uint64_t seed = 0;
    int patch_size = 224;
    int global_size = 512;
    std::vector<PatchRecord> patches;
    std::vector<GlobalRecord> globals;

    std::map<std::string, SourceCounts> counts() const {
        std::map<std::string, SourceCounts> c;
        for (const auto& p : patches) ++c[p.source_id].patches;
        for (const auto& g : globals) ++c[g.source_id].globals;
        return c;
    }

    /// Canonical order: (source_id, scale, rotation, grid) for patches and
    /// (source_id, flip) for global records.
    void sort() {
        std::stable_sort(patches.begin(), patches.end(),
                         [](const PatchRecord& a, const PatchRecord& b) { return a.key() < b.key(); });
        std::stable_sort(globals.begin(), globals.end(), [](const GlobalRecord& a, const GlobalRecord& b) {
            return std::tie(a.source_id, a.flip) < std::tie(b.source_id, b.flip);
        });
    }

    friend bool operator==(const Manifest&, const Manifest&) = default;
};

inline constexpr const char* kManifestFile = "manifest.txt";
inline constexpr const char* kManifestMagic = "# docbin-manifest v1";

namespace detail {

inline std::string format_real(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline double parse_real(const std::string& s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        throw Error(ErrorCode::corrupt_header, "bad number '" + s + "' in manifest");
    }
    return v;
}

inline long long parse_int(const std::string& s) {
    long long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        throw Error(ErrorCode::corrupt_header, "bad integer '" + s + "' in manifest");
    }
    return v;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> f;
    std::string cur;
    for (char ch : line) {
        if (ch == '\t') {
            f.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    f.push_back(cur);
    return f;
}

inline void check_source_id(const std::string& id) {
    if (id.empty() || id.find_first_of("\t\n/\\") != std::string::npos) {
        throw Error(ErrorCode::invalid_argument, "source id '" + id + "' must be non-empty without tabs or slashes");
    }
}

inline std::string write_payload(const std::filesystem::path& dir, const std::string& rel, const RasterImage& img) {
    const auto bytes = encode_netpbm(img);
    write_bytes(dir / rel, bytes);
    return hex64(fnv1a(bytes.data(), bytes.size()));
}

inline RasterImage read_payload(const std::filesystem::path& dir, const std::string& rel, const std::string& checksum) {
    const auto path = dir / rel;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorCode::missing_file, path.string());
    const auto bytes = read_bytes(path);
    if (hex64(fnv1a(bytes.data(), bytes.size())) != checksum) {
        throw Error(ErrorCode::checksum_mismatch, path.string());
    }
    return decode_netpbm(bytes);
}

inline std::string ext(const RasterImage& img) { return img.channels == 3 ? ".ppm" : ".pgm"; }

}  // namespace detail

inline void write_manifest(const Manifest& m, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "patches", ec);
    std::filesystem::create_directories(dir / "global", ec);
    if (ec) throw Error(ErrorCode::unwritable_path, dir.string());

    Manifest sorted = m;
    sorted.sort();
    std::ostringstream out;
    out << kManifestMagic << "\n";
    out << "seed\t" << sorted.seed << "\n";
    out << "patch_size\t" << sorted.patch_size << "\n";
    out << "global_size\t" << sorted.global_size << "\n";
    for (const auto& [id, c] : sorted.counts()) out << "source\t" << id << "\t" << c.patches << "\t" << c.globals << "\n";

    for (const auto& r : sorted.patches) {
        detail::check_source_id(r.source_id);
        const std::string stem = "patches/" + r.source_id + "_s" + detail::format_real(r.scale) + "_r" +
                                 std::to_string(r.rotation) + "_x" + std::to_string(r.grid_x) + "_y" +
                                 std::to_string(r.grid_y);
        const std::string img_rel = stem + detail::ext(r.patch), gt_rel = stem + "_gt.pgm";
        const std::string img_sum = detail::write_payload(dir, img_rel, r.patch);
        const std::string gt_sum = detail::write_payload(dir, gt_rel, to_raster(r.gt_patch));
        out << "patch\t" << img_rel << "\t" << gt_rel << "\t" << r.source_id << "\t" << detail::format_real(r.scale)
            << "\t" << r.rotation << "\t" << r.grid_x << "\t" << r.grid_y << "\t" << img_sum << "\t" << gt_sum << "\n";
    }
    for (const auto& r : sorted.globals) {
        detail::check_source_id(r.source_id);
        const std::string stem = "global/" + r.source_id + "_" + to_string(r.flip);
        const std::string img_rel = stem + detail::ext(r.image), gt_rel = stem + "_gt.pgm";
        const std::string img_sum = detail::write_payload(dir, img_rel, r.image);
        const std::string gt_sum = detail::write_payload(dir, gt_rel, to_raster(r.gt));
        out << "global\t" << img_rel << "\t" << gt_rel << "\t" << r.source_id << "\t" << to_string(r.flip) << "\t"
            << img_sum << "\t" << gt_sum << "\n";
    }
    const std::string text = out.str();
    write_bytes(dir / kManifestFile, std::vector<std::uint8_t>(text.begin(), text.end()));
}

inline Manifest read_manifest(const std::filesystem::path& dir) {
    const auto path = dir / kManifestFile;
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::missing_file, path.string());
    std::string line;
    if (!std::getline(in, line) || line != kManifestMagic) throw Error(ErrorCode::corrupt_header, path.string());

    Manifest m;
    std::map<std::string, SourceCounts> declared;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_tabs(line);
        const std::string& kind = f[0];
        if (kind == "seed" && f.size() == 2) {
            m.seed = static_cast<std::uint64_t>(std::stoull(f[1]));
        } else if (kind == "patch_size" && f.size() == 2) {
            m.patch_size = static_cast<int>(detail::parse_int(f[1]));
        } else if (kind == "global_size" && f.size() == 2) {
            m.global_size = static_cast<int>(detail::parse_int(f[1]));
        } else if (kind == "source" && f.size() == 4) {
            declared[f[1]] = {static_cast<std::size_t>(detail::parse_int(f[2])),
                              static_cast<std::size_t>(detail::parse_int(f[3]))};
        } else if (kind == "patch" && f.size() == 10) {
            PatchRecord r;
            r.source_id = f[3];
            r.scale = detail::parse_real(f[4]);
            r.rotation = static_cast<int>(detail::parse_int(f[5]));
            r.grid_x = static_cast<int>(detail::parse_int(f[6]));
            r.grid_y = static_cast<int>(detail::parse_int(f[7]));
            r.patch = detail::read_payload(dir, f[1], f[8]);
            r.gt_patch = to_binary(detail::read_payload(dir, f[2], f[9]));
            m.patches.push_back(std::move(r));
        } else if (kind == "global" && f.size() == 7) {
            GlobalRecord r;
            r.source_id = f[3];
            r.flip = parse_flip(f[4]);
            r.image = detail::read_payload(dir, f[1], f[5]);
            r.gt = to_binary(detail::read_payload(dir, f[2], f[6]));
            m.globals.push_back(std::move(r));
        } else {
            throw Error(ErrorCode::corrupt_header, "unrecognised manifest line: " + line);
        }
    }
    if (declared != m.counts()) throw Error(ErrorCode::corrupt_header, "per-source counts disagree with records");
    return m;
}

}  // namespace docbin

#endif  // DOCBIN_DATASET_MANIFEST_HPP
