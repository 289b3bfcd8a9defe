#ifndef DOCBIN_PIPELINE_CORPUS_HPP
#define DOCBIN_PIPELINE_CORPUS_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "docbin/core/netpbm.hpp"
#include "docbin/core/parallel.hpp"
#include "docbin/dataset/manifest.hpp"
#include "docbin/io/csv.hpp"
#include "docbin/metrics.hpp"

namespace docbin {

/// Corpus layout: <dir>/images/<name>.ppm|.pgm and <dir>/gt/<name>.pgm.
struct LabeledImage {
    std::string name;
    RasterImage image;
    BinaryImage gt;
};

inline bool is_netpbm_path(const std::filesystem::path& p) {
    const auto e = p.extension().string();
    return e == ".pgm" || e == ".ppm" || e == ".pnm";
}

/// Netpbm files of a directory keyed by stem, sorted by name.
inline std::map<std::string, std::filesystem::path> images_by_stem(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw Error(ErrorCode::missing_file, dir.string());
    std::map<std::string, std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && is_netpbm_path(e.path())) out[e.path().stem().string()] = e.path();
    }
    return out;
}

struct Pairing {
    std::vector<std::string> names;
    std::vector<std::filesystem::path> first;
    std::vector<std::filesystem::path> second;
    std::vector<std::string> unmatched;  // paths present on one side only
};

inline Pairing pair_by_stem(const std::filesystem::path& a, const std::filesystem::path& b) {
    const auto am = images_by_stem(a), bm = images_by_stem(b);
    Pairing p;
    for (const auto& [stem, path] : am) {
        const auto it = bm.find(stem);
        if (it == bm.end()) {
            p.unmatched.push_back(path.string());
            continue;
        }
        p.names.push_back(stem);
        p.first.push_back(path);
        p.second.push_back(it->second);
    }
    for (const auto& [stem, path] : bm) {
        if (!am.count(stem)) p.unmatched.push_back(path.string());
    }
    return p;
}

inline std::string join_lines(const std::vector<std::string>& items) {
    std::string s;
    for (const auto& i : items) s += "\n  " + i;
    return s;
}

inline std::vector<LabeledImage> load_corpus(const std::filesystem::path& dir) {
    const Pairing p = pair_by_stem(dir / "images", dir / "gt");
    if (!p.unmatched.empty()) throw Error(ErrorCode::unmatched_files, "no counterpart for:" + join_lines(p.unmatched));
    std::vector<LabeledImage> out;
    for (std::size_t i = 0; i < p.names.size(); ++i) {
        LabeledImage li{p.names[i], load_image(p.first[i]), load_binary(p.second[i])};
        require_same_size(li.image, li.gt, li.name.c_str());
        out.push_back(std::move(li));
    }
    return out;
}

inline void save_corpus_entry(const std::filesystem::path& dir, const LabeledImage& li) {
    save_image(li.image, dir / "images" / (li.name + (li.image.channels == 3 ? ".ppm" : ".pgm")));
    save_binary(li.gt, dir / "gt" / (li.name + ".pgm"));
}

/// Patch and global-view augmentation of every corpus image.
inline Manifest build_manifest(const std::vector<LabeledImage>& corpus, const PatchConfig& cfg, int global_size,
                               std::uint64_t seed) {
    Manifest m;
    m.seed = seed;
    m.patch_size = cfg.patch_size;
    m.global_size = global_size;
    for (const auto& li : corpus) {
        auto patches = extract_patches(li.image, li.gt, cfg, li.name);
        m.patches.insert(m.patches.end(), std::make_move_iterator(patches.begin()),
                         std::make_move_iterator(patches.end()));
        auto globals = global_augment(li.image, li.gt, global_size, li.name);
        m.globals.insert(m.globals.end(), std::make_move_iterator(globals.begin()),
                         std::make_move_iterator(globals.end()));
    }
    m.sort();
    return m;
}

struct NamedReport {
    std::string name;
    MetricsReport report;
};

/// Arithmetic mean of each metric over the rows.
inline MetricsReport mean_report(const std::vector<NamedReport>& rows) {
    MetricsReport m;
    if (rows.empty()) return m;
    for (const auto& r : rows) {
        m.fm.value += r.report.fm.value;
        m.pfm.value += r.report.pfm.value;
        m.psnr.value += r.report.psnr.value;
        m.drd.value += r.report.drd.value;
    }
    const double k = 1.0 / static_cast<double>(rows.size());
    m.fm.value *= k;
    m.pfm.value *= k;
    m.psnr.value *= k;
    m.drd.value *= k;
    return m;
}

/// Scores each prediction against the ground truth of the same stem.
inline std::vector<NamedReport> evaluate_directories(const std::filesystem::path& pred_dir,
                                                     const std::filesystem::path& gt_dir, int jobs = 1,
                                                     const PseudoFmOptions& opt = {}) {
    const Pairing p = pair_by_stem(pred_dir, gt_dir);
    if (!p.unmatched.empty()) throw Error(ErrorCode::unmatched_files, "no counterpart for:" + join_lines(p.unmatched));
    return parallel_map(p.names.size(), jobs, [&](std::size_t i) {
        return NamedReport{p.names[i], evaluate_all(load_binary(p.first[i]), load_binary(p.second[i]), opt)};
    });
}

inline std::vector<std::string> metric_fields(const MetricsReport& r) {
    return {format_fixed(r.fm.value), format_fixed(r.pfm.value), format_fixed(r.psnr.value), format_fixed(r.drd.value)};
}

/// name,fm,pfm,psnr,drd with one row per image and a final mean row.
inline std::string metrics_csv(const std::vector<NamedReport>& rows) {
    std::string out = csv_row({"name", "fm", "pfm", "psnr", "drd"});
    auto add = [&](const std::string& name, const MetricsReport& r) {
        std::vector<std::string> f{name};
        for (auto& v : metric_fields(r)) f.push_back(std::move(v));
        out += csv_row(f);
    };
    for (const auto& r : rows) add(r.name, r.report);
    add("mean", mean_report(rows));
    return out;
}

}  // namespace docbin

#endif  // DOCBIN_PIPELINE_CORPUS_HPP
