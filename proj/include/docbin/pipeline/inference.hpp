#ifndef DOCBIN_PIPELINE_INFERENCE_HPP
#define DOCBIN_PIPELINE_INFERENCE_HPP

#include <array>
#include <vector>

#include "docbin/classical.hpp"
#include "docbin/pipeline/training.hpp"

namespace docbin {

struct InferenceSizes {
    int patch_size = 224;
    int global_size = 512;
    int batch = 8;  // tiles per forward pass
};

/// Intermediate maps of one inference run, all at the input size.
struct InferenceResult {
    Plane enhanced;  // stitched stage-2 output
    Plane local;     // stage-3 local probability map
    Plane global;    // stage-3 global probability map, resized back
    BinaryImage binary;

    /// Stage-2 output on its own, binarized with Otsu.
    BinaryImage enhancement_binary() const { return otsu(enhanced).image; }
};

namespace detail {

/// Runs a single-channel-output generator over square tiles of `planes`.
inline std::vector<Tile> run_tiles(const nn::Generator& gen, const nn::NetParams& params,
                                   const std::vector<std::pair<std::array<int, 2>, nn::Tensor>>& inputs, int batch) {
    std::vector<Tile> out;
    out.reserve(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); i += static_cast<std::size_t>(batch)) {
        std::vector<const nn::Tensor*> chunk;
        for (std::size_t j = i; j < std::min(inputs.size(), i + batch); ++j) chunk.push_back(&inputs[j].second);
        const nn::Tensor y = generate(gen, params, stack(chunk), batch);
        for (std::size_t j = 0; j < chunk.size(); ++j) {
            out.push_back({inputs[i + j].first[0], inputs[i + j].first[1], plane_of(y, static_cast<int>(j))});
        }
    }
    return out;
}

}  // namespace detail

inline InferenceResult infer_detailed(const RasterImage& input, const EnhancementBundle& enh,
                                      const BinarizationBundle& bin, const PreprocessOption& opt,
                                      const InferenceSizes& sizes = {}) {
    if (!enh.trained() || !bin.trained()) throw Error(ErrorCode::invalid_argument, "infer: untrained bundle");
    if (sizes.patch_size % 8 || sizes.global_size % 8 || sizes.patch_size < 8 || sizes.global_size < 8) {
        throw Error(ErrorCode::invalid_argument, "infer: generator sizes must be positive multiples of 8");
    }
    const RasterImage img = as_rgb(input);
    const int p = sizes.patch_size;
    const auto tiles = tile_image(img, p);

    // Stage 2: each channel generator over every tile, then the mean.
    std::array<std::vector<std::pair<std::array<int, 2>, nn::Tensor>>, kChannelCount> channel_inputs;
    for (const auto& [grid, tile] : tiles) {
        const ChannelSet ch = preprocess_stage(tile, opt, p);
        for (int c = 0; c < kChannelCount; ++c) channel_inputs[c].push_back({grid, to_tensor(ch[c])});
    }
    const nn::Generator eg = enhancement_generator();
    std::array<Plane, kChannelCount> channel_maps;
    for (int c = 0; c < kChannelCount; ++c) {
        channel_maps[c] =
            stitch_patches(detail::run_tiles(eg, enh.generators[c], channel_inputs[c], sizes.batch), img.width, img.height);
    }
    InferenceResult r;
    r.enhanced = merge_enhanced(channel_maps);

    // Stage 3 local branch over tiles of the merged map.
    std::vector<std::pair<std::array<int, 2>, nn::Tensor>> local_inputs;
    for (const auto& [grid, tile] : tile_image(r.enhanced, p)) local_inputs.push_back({grid, to_tensor(tile)});
    r.local = stitch_patches(detail::run_tiles(local_generator(), bin.local_generator, local_inputs, sizes.batch),
                             img.width, img.height);

    // Stage 3 global branch on the whole page.
    const nn::Tensor g_in = to_tensor(resize_bilinear(img, sizes.global_size, sizes.global_size));
    r.global = resize_bilinear(plane_of(generate(global_generator(), bin.global_generator, g_in, 1)), img.width,
                               img.height);
    r.binary = combine_local_global(r.local, r.global, img.width, img.height);
    return r;
}

inline BinaryImage infer(const RasterImage& img, const EnhancementBundle& enh, const BinarizationBundle& bin,
                         const PreprocessOption& opt, const InferenceSizes& sizes = {}) {
    return infer_detailed(img, enh, bin, opt, sizes).binary;
}

}  // namespace docbin

#endif  // DOCBIN_PIPELINE_INFERENCE_HPP
