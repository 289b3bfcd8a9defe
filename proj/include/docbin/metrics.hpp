#ifndef DOCBIN_METRICS_HPP
#define DOCBIN_METRICS_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "docbin/core/error.hpp"
#include "docbin/core/image.hpp"
#include "docbin/morphology.hpp"

namespace docbin {

/// Pixel counts with foreground (bit 0) as the positive class.
struct Confusion {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const { return tp + fp + fn + tn; }
};

/// A metric value together with a flag set when the value is a sentinel
/// for an undefined quantity (empty foreground, identical images, ...).
struct Metric {
    double value = 0.0;
    bool degenerate = false;
};

inline Confusion confusion(const BinaryImage& pred, const BinaryImage& gt) {
    require_same_size(pred, gt, "confusion");
    Confusion c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred.data[i] == BinaryImage::foreground;
        const bool g = gt.data[i] == BinaryImage::foreground;
        if (p && g) {
            ++c.tp;
        } else if (p) {
            ++c.fp;
        } else if (g) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

namespace detail {
inline Metric harmonic_percent(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    if (tp == 0) return {0.0, true};
    const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return {100.0 * 2.0 * p * r / (p + r), false};
}
}  // namespace detail

/// FM = 2PR/(P+R) in percent. Undefined precision or recall yields 0, flagged.
inline Metric f_measure(const Confusion& c) { return detail::harmonic_percent(c.tp, c.fp, c.fn); }

struct PseudoFmOptions {
    int dilation_iterations = 2;  // 3x3 element
};

/// Pseudo F-measure: recall against the Zhang-Suen skeleton of the ground
/// truth, precision ignoring false positives that lie within the dilated
/// ground-truth foreground.
inline Metric pseudo_f_measure(const BinaryImage& pred, const BinaryImage& gt, const PseudoFmOptions& opt = {}) {
    require_same_size(pred, gt, "pseudo_f_measure");
    const BinaryImage skel = thin_zhang_suen(gt);
    const BinaryImage near = dilate(gt, opt.dilation_iterations);
    std::int64_t skel_total = 0, skel_hit = 0, tp = 0, fp_far = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred.data[i] == BinaryImage::foreground;
        if (skel.data[i] == BinaryImage::foreground) {
            ++skel_total;
            skel_hit += p;
        }
        if (!p) continue;
        if (gt.data[i] == BinaryImage::foreground) {
            ++tp;
        } else if (near.data[i] != BinaryImage::foreground) {
            ++fp_far;
        }
    }
    if (skel_total == 0 || tp == 0 || skel_hit == 0) return {0.0, true};
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp_far);
    const double recall = static_cast<double>(skel_hit) / static_cast<double>(skel_total);
    return {100.0 * 2.0 * precision * recall / (precision + recall), false};
}

/// PSNR for bilevel images with peak 1: 10 log10(1 / MSE). Identical images
/// give +infinity, flagged.
inline Metric psnr(const BinaryImage& pred, const BinaryImage& gt) {
    require_same_size(pred, gt, "psnr");
    std::int64_t diff = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) diff += pred.data[i] != gt.data[i];
    if (diff == 0) return {std::numeric_limits<double>::infinity(), true};
    const double mse = static_cast<double>(diff) / static_cast<double>(pred.size());
    return {10.0 * std::log10(1.0 / mse), false};
}

/// Normalized 5x5 reciprocal-distance weights; centre weight is zero.
struct DrdWeights {
    std::array<std::array<double, 5>, 5> w{};

    static DrdWeights make() {
        DrdWeights d;
        double sum = 0.0;
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) {
                if (i == 2 && j == 2) continue;
                d.w[i][j] = 1.0 / std::hypot(i - 2.0, j - 2.0);
                sum += d.w[i][j];
            }
        }
        for (auto& row : d.w) {
            for (auto& v : row) v /= sum;
        }
        return d;
    }
};

/// Number of 8x8 ground-truth blocks, anchored at (0,0) and including
/// partial edge blocks, that contain both foreground and background.
inline std::int64_t nubn(const BinaryImage& gt) {
    std::int64_t n = 0;
    for (int by = 0; by < gt.height; by += 8) {
        for (int bx = 0; bx < gt.width; bx += 8) {
            bool any_fg = false, any_bg = false;
            for (int y = by; y < std::min(by + 8, gt.height); ++y) {
                for (int x = bx; x < std::min(bx + 8, gt.width); ++x) {
                    (gt.is_fg(x, y) ? any_fg : any_bg) = true;
                }
            }
            n += any_fg && any_bg;
        }
    }
    return n;
}

/// Distance reciprocal distortion. Each flipped pixel k contributes
/// sum_{5x5} |gt(i,j) - pred(k)| * W(i,j) over its ground-truth
/// neighbourhood (reflect padded); the total is divided by NUBN. With no
/// non-uniform block the raw sum is returned, flagged.
inline Metric drd(const BinaryImage& pred, const BinaryImage& gt) {
    require_same_size(pred, gt, "drd");
    static const DrdWeights weights = DrdWeights::make();
    // Neumaier-compensated sum keeps the total independent of summation drift.
    double sum = 0.0, comp = 0.0;
    for (int y = 0; y < gt.height; ++y) {
        for (int x = 0; x < gt.width; ++x) {
            const int p = pred.at(x, y);
            if (p == gt.at(x, y)) continue;
            double dk = 0.0;
            for (int i = 0; i < 5; ++i) {
                const int gy = reflect_index(y + i - 2, gt.height);
                for (int j = 0; j < 5; ++j) {
                    const int gx = reflect_index(x + j - 2, gt.width);
                    if (gt.at(gx, gy) != p) dk += weights.w[i][j];
                }
            }
            const double t = sum + dk;
            comp += std::abs(sum) >= std::abs(dk) ? (sum - t) + dk : (dk - t) + sum;
            sum = t;
        }
    }
    const double total = sum + comp;
    const std::int64_t blocks = nubn(gt);
    if (blocks == 0) return {total, true};
    return {total / static_cast<double>(blocks), false};
}

struct MetricsReport {
    Metric fm;
    Metric pfm;
    Metric psnr;
    Metric drd;
};

inline MetricsReport evaluate_all(const BinaryImage& pred, const BinaryImage& gt, const PseudoFmOptions& opt = {}) {
    require_same_size(pred, gt, "evaluate_all");
    MetricsReport r;
    r.fm = f_measure(confusion(pred, gt));
    r.pfm = pseudo_f_measure(pred, gt, opt);
    r.psnr = psnr(pred, gt);
    r.drd = drd(pred, gt);
    return r;
}

}  // namespace docbin

#endif  // DOCBIN_METRICS_HPP
