#ifndef DOCBIN_PIPELINE_OPTIONS_HPP
#define DOCBIN_PIPELINE_OPTIONS_HPP

#include <array>
#include <string>

#include "docbin/core/error.hpp"

namespace docbin {

enum class PlaneMode { raw, dwt_ll, dwt_ll_norm };

/// Table labels: "\" for an untransformed plane.
inline const char* label(PlaneMode m) {
    switch (m) {
        case PlaneMode::raw: return "\\";
        case PlaneMode::dwt_ll: return "DWT (LL)";
        case PlaneMode::dwt_ll_norm: return "DWT (LL) + Norm";
    }
    return "?";
}

inline const char* to_string(PlaneMode m) {
    switch (m) {
        case PlaneMode::raw: return "raw";
        case PlaneMode::dwt_ll: return "dwt_ll";
        case PlaneMode::dwt_ll_norm: return "dwt_ll_norm";
    }
    return "?";
}

/// Transform applied to the generator input planes and to the planes summed
/// into the enhancement ground truth. Seven combinations are valid.
struct PreprocessOption {
    PlaneMode input_mode = PlaneMode::raw;
    PlaneMode gt_mode = PlaneMode::dwt_ll_norm;
    int option_id = 3;

    static constexpr int kCount = 7;

    static PreprocessOption from_id(int id) {
        static constexpr std::array<std::array<PlaneMode, 2>, kCount> table = {{
            {PlaneMode::raw, PlaneMode::raw},
            {PlaneMode::raw, PlaneMode::dwt_ll},
            {PlaneMode::raw, PlaneMode::dwt_ll_norm},
            {PlaneMode::dwt_ll, PlaneMode::raw},
            {PlaneMode::dwt_ll_norm, PlaneMode::raw},
            {PlaneMode::dwt_ll, PlaneMode::dwt_ll},
            {PlaneMode::dwt_ll_norm, PlaneMode::dwt_ll_norm},
        }};
        if (id < 1 || id > kCount) {
            throw Error(ErrorCode::invalid_argument, "preprocess option must be 1..7, got " + std::to_string(id));
        }
        return {table[id - 1][0], table[id - 1][1], id};
    }

    static PreprocessOption from_modes(PlaneMode input, PlaneMode gt) {
        for (int id = 1; id <= kCount; ++id) {
            const auto o = from_id(id);
            if (o.input_mode == input && o.gt_mode == gt) return o;
        }
        throw Error(ErrorCode::invalid_argument, std::string("no option for input ") + to_string(input) + ", gt " +
                                                     to_string(gt));
    }

    friend bool operator==(const PreprocessOption&, const PreprocessOption&) = default;
};

}  // namespace docbin

#endif  // DOCBIN_PIPELINE_OPTIONS_HPP
