#ifndef DOCBIN_PIPELINE_STAGES_HPP
#define DOCBIN_PIPELINE_STAGES_HPP

#include <array>
#include <vector>

#include "docbin/core/error.hpp"
#include "docbin/core/image.hpp"
#include "docbin/dataset/patches.hpp"
#include "docbin/pipeline/options.hpp"
#include "docbin/wavelet.hpp"

namespace docbin {

inline constexpr int kChannelCount = 4;  // red, green, blue, gray

/// raw: resize only; dwt_ll: LL subband then resize; dwt_ll_norm: LL,
/// resize, then normalize to [-1,1].
inline Plane preprocess_plane(const Plane& p, PlaneMode mode, int size) {
    switch (mode) {
        case PlaneMode::raw: return resize_bilinear(p, size, size);
        case PlaneMode::dwt_ll: return resize_bilinear(extract_ll(p), size, size);
        case PlaneMode::dwt_ll_norm: return normalize(resize_bilinear(extract_ll(p), size, size));
    }
    throw Error(ErrorCode::invalid_argument, "unknown plane mode");
}

/// Single-channel inputs are promoted to grey RGB.
inline RasterImage as_rgb(const RasterImage& img) {
    if (img.channels == 3) return img;
    if (img.channels != 1) throw Error(ErrorCode::invalid_argument, "expected 1 or 3 channels");
    const Plane g = to_gray(img);
    return merge_rgb(g, g, g);
}

inline ChannelSet preprocess_channels(const RasterImage& img, PlaneMode mode, int size) {
    const ChannelSet split = split_channels(as_rgb(img));
    ChannelSet out;
    for (int c = 0; c < kChannelCount; ++c) out[c] = preprocess_plane(split[c], mode, size);
    return out;
}

/// Generator inputs for the enhancement stage.
inline ChannelSet preprocess_stage(const RasterImage& img, const PreprocessOption& opt, int size = 224) {
    (void)PreprocessOption::from_id(opt.option_id);
    return preprocess_channels(img, opt.input_mode, size);
}

/// saturating_sum(gt, channel): background pixels saturate to 1, ink pixels
/// keep the channel value. Normalized channels are mapped back to [0,1]
/// first.
inline Plane enhancement_gt(const BinaryImage& gt, const Plane& channel, bool normalized = false) {
    require_same_size(gt, channel, "enhancement_gt");
    return saturating_sum(to_plane(gt), normalized ? denormalize(channel) : channel);
}

/// Four enhancement targets for one patch under `opt`.
inline std::array<Plane, kChannelCount> enhancement_targets(const RasterImage& img, const BinaryImage& gt,
                                                             const PreprocessOption& opt, int size) {
    const ChannelSet ch = preprocess_channels(img, opt.gt_mode, size);
    const BinaryImage g = resize_nearest(gt, size, size);
    std::array<Plane, kChannelCount> out;
    for (int c = 0; c < kChannelCount; ++c) out[c] = enhancement_gt(g, ch[c], opt.gt_mode == PlaneMode::dwt_ll_norm);
    return out;
}

inline Plane merge_enhanced(const std::array<Plane, kChannelCount>& channels) {
    Plane out(channels[0].width, channels[0].height);
    for (const auto& p : channels) require_same_size(channels[0], p, "merge_enhanced");
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (const auto& p : channels) s += p.data[i];
        out.data[i] = s / kChannelCount;
    }
    return out;
}

struct Tile {
    int grid_x = 0;
    int grid_y = 0;
    Plane plane;
};

/// Scale-1, rotation-0 tiling: the canvas is reflect-padded up to a whole
/// number of tiles, row-major order.
template <class Img>
std::vector<std::pair<std::array<int, 2>, Img>> tile_image(const Img& img, int patch) {
    if (patch < 1) throw Error(ErrorCode::invalid_argument, "patch size must be positive");
    const int nx = tiles_along(img.width, patch), ny = tiles_along(img.height, patch);
    const Img padded = pad_reflect(img, nx * patch, ny * patch);
    std::vector<std::pair<std::array<int, 2>, Img>> out;
    for (int gy = 0; gy < ny; ++gy) {
        for (int gx = 0; gx < nx; ++gx) out.push_back({{gx, gy}, crop(padded, gx * patch, gy * patch, patch, patch)});
    }
    return out;
}

inline Plane stitch_patches(const std::vector<Tile>& tiles, int full_width, int full_height) {
    if (tiles.empty()) throw Error(ErrorCode::invalid_argument, "stitch_patches: no tiles");
    const int p = tiles.front().plane.width;
    const int nx = tiles_along(full_width, p), ny = tiles_along(full_height, p);
    std::vector<char> seen(static_cast<std::size_t>(nx) * ny, 0);
    Plane canvas(nx * p, ny * p);
    for (const auto& t : tiles) {
        if (t.plane.width != p || t.plane.height != p) {
            throw Error(ErrorCode::dimension_mismatch, "stitch_patches: tiles must be equal squares");
        }
        if (t.grid_x < 0 || t.grid_x >= nx || t.grid_y < 0 || t.grid_y >= ny) {
            throw Error(ErrorCode::invalid_argument, "stitch_patches: tile outside the canvas");
        }
        seen[static_cast<std::size_t>(t.grid_y) * nx + t.grid_x] = 1;
        paste(canvas, t.plane, t.grid_x * p, t.grid_y * p);
    }
    for (int gy = 0; gy < ny; ++gy) {
        for (int gx = 0; gx < nx; ++gx) {
            if (!seen[static_cast<std::size_t>(gy) * nx + gx]) {
                throw Error(ErrorCode::invalid_argument,
                            "stitch_patches: missing tile (" + std::to_string(gx) + "," + std::to_string(gy) + ")");
            }
        }
    }
    return crop(canvas, 0, 0, full_width, full_height);
}

/// Mean of the two probability maps after bilinear resize to the output
/// size; <= 0.5 is ink.
inline BinaryImage combine_local_global(const Plane& local, const Plane& global_pred, int width, int height) {
    const Plane a = resize_bilinear(local, width, height);
    const Plane b = resize_bilinear(global_pred, width, height);
    Plane mean(width, height);
    for (std::size_t i = 0; i < mean.size(); ++i) mean.data[i] = 0.5 * (a.data[i] + b.data[i]);
    return threshold_plane(mean, 0.5);
}

}  // namespace docbin

#endif  // DOCBIN_PIPELINE_STAGES_HPP
