#ifndef DOCBIN_DATASET_PATCHES_HPP
#define DOCBIN_DATASET_PATCHES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "docbin/core/error.hpp"
#include "docbin/core/image.hpp"

namespace docbin {

struct PatchConfig {
    std::vector<double> scales = {0.75, 1.0, 1.25, 1.5};
    std::vector<int> rotations = {0, 90, 180, 270};
    int patch_size = 224;

    void validate() const {
        if (patch_size < 1) throw Error(ErrorCode::invalid_argument, "patch size must be positive");
        if (scales.empty() || rotations.empty()) throw Error(ErrorCode::invalid_argument, "empty scale/rotation set");
        for (double s : scales) {
            if (!(s > 0.0)) throw Error(ErrorCode::invalid_argument, "scales must be positive");
        }
        for (int r : rotations) {
            if (r != 0 && r != 90 && r != 180 && r != 270) {
                throw Error(ErrorCode::invalid_argument, "rotation must be one of 0, 90, 180, 270");
            }
        }
    }
};

struct PatchRecord {
    std::string source_id;
    double scale = 1.0;
    int rotation = 0;
    int grid_x = 0;
    int grid_y = 0;
    RasterImage patch;   // patch_size x patch_size, channels of the source
    BinaryImage gt_patch;

    auto key() const { return std::tie(source_id, scale, rotation, grid_y, grid_x); }
    friend bool operator==(const PatchRecord&, const PatchRecord&) = default;
};

inline int scaled_extent(int extent, double scale) { return std::max(1, static_cast<int>(std::lround(scale * extent))); }

inline int tiles_along(int extent, int patch) { return (extent + patch - 1) / patch; }

/// Closed-form record count: sum_s ceil(round(sW)/P) * ceil(round(sH)/P) * |rotations|.
inline std::size_t expected_patch_count(int width, int height, const PatchConfig& cfg) {
    std::size_t n = 0;
    for (double s : cfg.scales) {
        n += static_cast<std::size_t>(tiles_along(scaled_extent(width, s), cfg.patch_size)) *
             tiles_along(scaled_extent(height, s), cfg.patch_size) * cfg.rotations.size();
    }
    return n;
}

/// Bilinear resize then re-binarisation at 0.5 (values <= 0.5 stay ink).
inline BinaryImage resize_binary_bilinear(const BinaryImage& gt, int w, int h) {
    if (w == gt.width && h == gt.height) return gt;
    return threshold_plane(resize_bilinear(to_plane(gt), w, h), 0.5);
}

/// Resizes image and ground truth by each scale, tiles the result into
/// non-overlapping patch_size squares anchored at (0,0) (right/bottom
/// remainders completed by reflection), and emits every tile at every
/// rotation. Records come out sorted by (scale, rotation, row, column).
inline std::vector<PatchRecord> extract_patches(const RasterImage& img, const BinaryImage& gt, const PatchConfig& cfg,
                                                const std::string& source_id = "") {
    cfg.validate();
    if (!img.valid()) throw Error(ErrorCode::invalid_argument, "image must be at least 1x1");
    require_same_size(img, gt, "extract_patches");
    const int p = cfg.patch_size;
    std::vector<double> scales = cfg.scales;
    std::vector<int> rotations = cfg.rotations;
    std::sort(scales.begin(), scales.end());
    std::sort(rotations.begin(), rotations.end());

    std::vector<PatchRecord> out;
    out.reserve(expected_patch_count(img.width, img.height, cfg));
    for (double s : scales) {
        const int w = scaled_extent(img.width, s), h = scaled_extent(img.height, s);
        const int nx = tiles_along(w, p), ny = tiles_along(h, p);
        const RasterImage scaled = pad_reflect(resize_bilinear(img, w, h), nx * p, ny * p);
        const BinaryImage scaled_gt = pad_reflect(resize_binary_bilinear(gt, w, h), nx * p, ny * p);
        for (int r : rotations) {
            for (int gy = 0; gy < ny; ++gy) {
                for (int gx = 0; gx < nx; ++gx) {
                    PatchRecord rec;
                    rec.source_id = source_id;
                    rec.scale = s;
                    rec.rotation = r;
                    rec.grid_x = gx;
                    rec.grid_y = gy;
                    rec.patch = rotate(crop(scaled, gx * p, gy * p, p, p), r);
                    rec.gt_patch = rotate(crop(scaled_gt, gx * p, gy * p, p, p), r);
                    out.push_back(std::move(rec));
                }
            }
        }
    }
    return out;
}

enum class Flip { identity, horizontal, vertical };

inline const char* to_string(Flip f) {
    switch (f) {
        case Flip::identity: return "identity";
        case Flip::horizontal: return "horizontal";
        case Flip::vertical: return "vertical";
    }
    return "?";
}

inline Flip parse_flip(const std::string& s) {
    if (s == "identity") return Flip::identity;
    if (s == "horizontal") return Flip::horizontal;
    if (s == "vertical") return Flip::vertical;
    throw Error(ErrorCode::invalid_argument, "unknown flip " + s);
}

struct GlobalRecord {
    std::string source_id;
    Flip flip = Flip::identity;
    RasterImage image;  // global_size x global_size
    BinaryImage gt;

    friend bool operator==(const GlobalRecord&, const GlobalRecord&) = default;
};

template <class Img>
Img apply_flip(const Img& img, Flip f) {
    switch (f) {
        case Flip::horizontal: return flip_horizontal(img);
        case Flip::vertical: return flip_vertical(img);
        case Flip::identity: break;
    }
    return img;
}

/// Whole-image resize (bilinear image, nearest ground truth) emitted as
/// identity, horizontal flip and vertical flip: three records per source.
inline std::vector<GlobalRecord> global_augment(const RasterImage& img, const BinaryImage& gt, int size = 512,
                                                const std::string& source_id = "") {
    require_same_size(img, gt, "global_augment");
    const RasterImage r = resize_bilinear(img, size, size);
    const BinaryImage g = resize_nearest(gt, size, size);
    std::vector<GlobalRecord> out;
    for (Flip f : {Flip::identity, Flip::horizontal, Flip::vertical}) {
        out.push_back(GlobalRecord{source_id, f, apply_flip(r, f), apply_flip(g, f)});
    }
    return out;
}

}  // namespace docbin

#endif  // DOCBIN_DATASET_PATCHES_HPP
