#ifndef DOCBIN_DATASET_SYNTH_HPP
#define DOCBIN_DATASET_SYNTH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

#include "docbin/core/error.hpp"
#include "docbin/core/image.hpp"
#include "docbin/core/random.hpp"

namespace docbin {

/// Parameters of a synthetic degraded document. Amplitudes are on the [0,1]
/// intensity scale; all-zero degradations give the clean ink-on-paper render.
struct SynthSpec {
    int width = 128;
    int height = 128;
    double stroke_density = 0.7;       // probability that a glyph cell carries a glyph
    int glyph_height = 12;             // text line pitch is 1.6x this
    double gradient_amplitude = 0.0;   // max darkening of the low-frequency background field
    int stain_count = 0;
    double stain_size = 0.15;          // stain radius as a fraction of min(width, height)
    double stain_opacity = 0.35;
    double bleed_opacity = 0.0;        // opacity of the mirrored reverse-side ink
    double noise_sigma = 0.0;
    std::uint64_t seed = 1;

    std::array<double, 3> paper = {1.0, 1.0, 1.0};
    std::array<double, 3> ink = {0.08, 0.08, 0.22};
    std::array<double, 3> stain = {0.55, 0.42, 0.25};

    void validate() const {
        if (width < 1 || height < 1) throw Error(ErrorCode::invalid_argument, "synth canvas must be at least 1x1");
        if (glyph_height < 3) throw Error(ErrorCode::invalid_argument, "glyph height must be at least 3");
        const auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!unit(stroke_density) || !unit(gradient_amplitude) || !unit(stain_opacity) || !unit(bleed_opacity) ||
            stain_count < 0 || !(stain_size >= 0.0) || !(noise_sigma >= 0.0)) {
            throw Error(ErrorCode::invalid_argument, "synth amplitudes out of range");
        }
    }

    /// Strong background gradient plus bleed-through, stains and noise.
    static SynthSpec hard(std::uint64_t seed, int w = 128, int h = 128) {
        SynthSpec s;
        s.width = w;
        s.height = h;
        s.seed = seed;
        s.gradient_amplitude = 0.8;
        s.stain_count = 2;
        s.stain_opacity = 0.5;
        s.bleed_opacity = 0.5;
        s.noise_sigma = 0.03;
        return s;
    }
};

struct SynthDocument {
    RasterImage degraded;
    BinaryImage gt;
};

namespace detail {

inline void stamp_disc(BinaryImage& gt, double cx, double cy, double radius) {
    const int x0 = static_cast<int>(std::floor(cx - radius)), x1 = static_cast<int>(std::ceil(cx + radius));
    const int y0 = static_cast<int>(std::floor(cy - radius)), y1 = static_cast<int>(std::ceil(cy + radius));
    for (int y = std::max(0, y0); y <= std::min(gt.height - 1, y1); ++y) {
        for (int x = std::max(0, x0); x <= std::min(gt.width - 1, x1); ++x) {
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy <= radius * radius) gt.at(x, y) = BinaryImage::foreground;
        }
    }
}

inline void draw_segment(BinaryImage& gt, double x0, double y0, double x1, double y1, double radius) {
    const double len = std::hypot(x1 - x0, y1 - y0);
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        stamp_disc(gt, x0 + t * (x1 - x0), y0 + t * (y1 - y0), radius);
    }
}

/// Pseudo-glyphs: 2-4 strokes between points of a 3x3 lattice in the cell.
inline BinaryImage draw_text(const SynthSpec& s, Rng& rng) {
    BinaryImage gt(s.width, s.height);
    const int gh = s.glyph_height;
    const int gw = std::max(3, gh * 3 / 4);
    const int pitch = gh * 8 / 5;
    const int margin = std::max(1, gh / 2);
    const double radius = std::max(0.5, gh / 12.0);
    for (int top = margin; top + gh <= s.height - margin / 2; top += pitch) {
        int left = margin;
        while (left + gw <= s.width - margin / 2) {
            if (rng.uniform() < 0.12) {  // word gap
                left += gw;
                continue;
            }
            if (rng.uniform() < s.stroke_density) {
                const int strokes = rng.uniform_int(2, 4);
                for (int k = 0; k < strokes; ++k) {
                    const auto lattice = [&](int& ix, int& iy) {
                        ix = rng.uniform_int(0, 2);
                        iy = rng.uniform_int(0, 2);
                    };
                    int ax, ay, bx, by;
                    lattice(ax, ay);
                    do lattice(bx, by);
                    while (ax == bx && ay == by);
                    const auto px = [&](int i) { return left + 1 + i * (gw - 3) / 2.0; };
                    const auto py = [&](int i) { return top + 1 + i * (gh - 3) / 2.0; };
                    draw_segment(gt, px(ax), py(ay), px(bx), py(by), radius);
                }
            }
            left += gw + std::max(1, gw / 4);
        }
    }
    return gt;
}

}  // namespace detail

/// Ink-on-paper rendering of a ground truth with no degradation, as [0,1]
/// RGB planes.
inline std::array<Plane, 3> render_clean(const BinaryImage& gt, const SynthSpec& s) {
    std::array<Plane, 3> rgb{Plane(gt.width, gt.height), Plane(gt.width, gt.height), Plane(gt.width, gt.height)};
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < gt.size(); ++i) {
            rgb[c].data[i] = gt.data[i] == BinaryImage::foreground ? s.ink[c] : s.paper[c];
        }
    }
    return rgb;
}

/// Deterministic synthetic page: ground-truth strokes first, then
/// background gradient, stains, bleed-through and pixel noise on the RGB
/// render.
inline SynthDocument synth_document(const SynthSpec& s) {
    s.validate();
    Rng rng(s.seed);
    SynthDocument doc;
    doc.gt = detail::draw_text(s, rng);
    auto rgb = render_clean(doc.gt, s);
    const int w = s.width, h = s.height;

    // Bleed-through: reverse-side text is a fresh page mirrored left-right.
    if (s.bleed_opacity > 0.0) {
        SynthSpec back = s;
        back.seed = derive_seed(s.seed, "reverse-side");
        Rng back_rng(back.seed);
        const BinaryImage verso = flip_horizontal(detail::draw_text(back, back_rng));
        for (std::size_t i = 0; i < verso.size(); ++i) {
            if (verso.data[i] != BinaryImage::foreground || doc.gt.data[i] == BinaryImage::foreground) continue;
            for (int c = 0; c < 3; ++c) {
                rgb[c].data[i] = (1.0 - s.bleed_opacity) * rgb[c].data[i] + s.bleed_opacity * s.ink[c];
            }
        }
    }

    // Low-frequency darkening: a ramp in a random direction plus a broad bump.
    if (s.gradient_amplitude > 0.0) {
        const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double bx = rng.uniform(0.0, w), by = rng.uniform(0.0, h);
        const double ux = std::cos(theta), uy = std::sin(theta);
        const double span = std::abs(ux) * w + std::abs(uy) * h;
        const double lo = std::min(0.0, ux * w) + std::min(0.0, uy * h);
        const double sigma = 0.35 * std::max(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double ramp = (ux * x + uy * y - lo) / span;
                const double bump = std::exp(-((x - bx) * (x - bx) + (y - by) * (y - by)) / (2.0 * sigma * sigma));
                const double field = std::clamp(0.7 * ramp + 0.3 * bump, 0.0, 1.0);
                const double f = 1.0 - s.gradient_amplitude * field;
                for (int c = 0; c < 3; ++c) rgb[c].at(x, y) *= f;
            }
        }
    }

    for (int k = 0; k < s.stain_count; ++k) {
        const double cx = rng.uniform(0.0, w), cy = rng.uniform(0.0, h);
        const double r = s.stain_size * std::min(w, h);
        const double rx = r * rng.uniform(0.6, 1.4), ry = r * rng.uniform(0.6, 1.4);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double d = std::hypot((x - cx) / std::max(rx, 1e-9), (y - cy) / std::max(ry, 1e-9));
                if (d >= 1.0) continue;
                const double a = s.stain_opacity * (1.0 - d * d);
                for (int c = 0; c < 3; ++c) rgb[c].at(x, y) = (1.0 - a) * rgb[c].at(x, y) + a * s.stain[c] * rgb[c].at(x, y);
            }
        }
    }

    if (s.noise_sigma > 0.0) {
        for (int c = 0; c < 3; ++c) {
            for (double& v : rgb[c].data) v += s.noise_sigma * rng.normal();
        }
    }
    doc.degraded = merge_rgb(rgb[0], rgb[1], rgb[2]);
    return doc;
}

}  // namespace docbin

#endif  // DOCBIN_DATASET_SYNTH_HPP
