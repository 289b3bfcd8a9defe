#ifndef DOCBIN_CORE_IMAGE_HPP
#define DOCBIN_CORE_IMAGE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "docbin/core/error.hpp"

namespace docbin {

/// 8-bit interleaved image with one (gray) or three (RGB) channels.
struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> data;

    RasterImage() = default;
    RasterImage(int w, int h, int c, std::uint8_t fill = 0) : width(w), height(h), channels(c) {
        if (w < 1 || h < 1) throw Error(ErrorCode::invalid_argument, "raster dimensions must be positive");
        if (c != 1 && c != 3) throw Error(ErrorCode::invalid_argument, "raster must have 1 or 3 channels");
        data.assign(static_cast<std::size_t>(w) * h * c, fill);
    }

    std::uint8_t& at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool valid() const {
        return width >= 1 && height >= 1 && (channels == 1 || channels == 3) &&
               data.size() == static_cast<std::size_t>(width) * height * channels;
    }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

/// Single-channel real-valued image. Values are in [0,1] unless normalized.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Plane() = default;
    Plane(int w, int h, double fill = 0.0) : width(w), height(h) {
        if (w < 1 || h < 1) throw Error(ErrorCode::invalid_argument, "plane dimensions must be positive");
        data.assign(static_cast<std::size_t>(w) * h, fill);
    }

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return data.size(); }
    static constexpr int channels = 1;

    friend bool operator==(const Plane&, const Plane&) = default;
};

/// Bilevel image. Bit 0 is foreground (ink), bit 1 is background (paper).
struct BinaryImage {
    static constexpr std::uint8_t foreground = 0;
    static constexpr std::uint8_t background = 1;

    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    BinaryImage() = default;
    BinaryImage(int w, int h, std::uint8_t fill = background) : width(w), height(h) {
        if (w < 1 || h < 1) throw Error(ErrorCode::invalid_argument, "binary image dimensions must be positive");
        data.assign(static_cast<std::size_t>(w) * h, fill);
    }

    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    bool is_fg(int x, int y) const { return at(x, y) == foreground; }
    std::size_t size() const { return data.size(); }
    static constexpr int channels = 1;

    friend bool operator==(const BinaryImage&, const BinaryImage&) = default;
};

struct ChannelSet {
    Plane red;
    Plane green;
    Plane blue;
    Plane gray;

    static constexpr int count = 4;
    static constexpr const char* names[count] = {"red", "green", "blue", "gray"};

    Plane& operator[](int i) { return i == 0 ? red : i == 1 ? green : i == 2 ? blue : gray; }
    const Plane& operator[](int i) const { return i == 0 ? red : i == 1 ? green : i == 2 ? blue : gray; }
};

/// Symmetric (edge-repeating) reflection of an index into [0, n). Works for any offset.
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

template <class A, class B>
void require_same_size(const A& a, const B& b, const char* what) {
    if (a.width != b.width || a.height != b.height) {
        throw Error(ErrorCode::dimension_mismatch,
                    std::string(what) + ": " + std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                        std::to_string(b.width) + "x" + std::to_string(b.height));
    }
}

// BT.601 luma weights.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline ChannelSet split_channels(const RasterImage& img) {
    if (img.channels != 3) {
        throw Error(ErrorCode::invalid_argument,
                    "split_channels needs a 3-channel image; use to_gray for single-channel input");
    }
    ChannelSet out{Plane(img.width, img.height), Plane(img.width, img.height), Plane(img.width, img.height),
                   Plane(img.width, img.height)};
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = img.data[3 * i] / 255.0;
        const double g = img.data[3 * i + 1] / 255.0;
        const double b = img.data[3 * i + 2] / 255.0;
        out.red.data[i] = r;
        out.green.data[i] = g;
        out.blue.data[i] = b;
        out.gray.data[i] = std::clamp(kLumaR * r + kLumaG * g + kLumaB * b, 0.0, 1.0);
    }
    return out;
}

/// Gray view of any raster: the sample itself for 1-channel, BT.601 luma for RGB.
inline Plane to_gray(const RasterImage& img) {
    if (img.channels == 3) return split_channels(img).gray;
    Plane p(img.width, img.height);
    for (std::size_t i = 0; i < p.size(); ++i) p.data[i] = img.data[i] / 255.0;
    return p;
}

inline std::uint8_t quantize(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline RasterImage to_raster(const Plane& p) {
    RasterImage img(p.width, p.height, 1);
    for (std::size_t i = 0; i < p.size(); ++i) img.data[i] = quantize(p.data[i]);
    return img;
}

inline RasterImage merge_rgb(const Plane& r, const Plane& g, const Plane& b) {
    require_same_size(r, g, "merge_rgb");
    require_same_size(r, b, "merge_rgb");
    RasterImage img(r.width, r.height, 3);
    for (std::size_t i = 0; i < r.size(); ++i) {
        img.data[3 * i] = quantize(r.data[i]);
        img.data[3 * i + 1] = quantize(g.data[i]);
        img.data[3 * i + 2] = quantize(b.data[i]);
    }
    return img;
}

inline Plane to_plane(const BinaryImage& b) {
    Plane p(b.width, b.height);
    for (std::size_t i = 0; i < b.size(); ++i) p.data[i] = b.data[i];
    return p;
}

/// Values <= threshold become foreground.
inline BinaryImage threshold_plane(const Plane& p, double threshold) {
    BinaryImage b(p.width, p.height);
    for (std::size_t i = 0; i < p.size(); ++i) {
        b.data[i] = p.data[i] <= threshold ? BinaryImage::foreground : BinaryImage::background;
    }
    return b;
}

inline RasterImage to_raster(const BinaryImage& b) {
    RasterImage img(b.width, b.height, 1);
    for (std::size_t i = 0; i < b.size(); ++i) img.data[i] = b.data[i] ? 255 : 0;
    return img;
}

/// Any sample above mid-gray is background.
inline BinaryImage to_binary(const RasterImage& img) {
    const Plane g = to_gray(img);
    return threshold_plane(g, 0.5);
}

/// Bilinear resampling with half-pixel-centred sample positions and clamped borders.
inline Plane resize_bilinear(const Plane& p, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw Error(ErrorCode::invalid_argument, "resize target must be at least 1x1");
    if (out_w == p.width && out_h == p.height) return p;
    Plane out(out_w, out_h);
    const double sx = static_cast<double>(p.width) / out_w;
    const double sy = static_cast<double>(p.height) / out_h;

    struct Tap {
        int i0, i1;
        double f;
    };
    auto taps = [](int n_out, int n_in, double s) {
        std::vector<Tap> t(n_out);
        for (int o = 0; o < n_out; ++o) {
            const double src = std::clamp((o + 0.5) * s - 0.5, 0.0, static_cast<double>(n_in - 1));
            const int i0 = static_cast<int>(std::floor(src));
            t[o] = {i0, std::min(i0 + 1, n_in - 1), src - i0};
        }
        return t;
    };
    auto lerp = [](double a, double b, double f) {
        const double v = a + f * (b - a);
        return std::clamp(v, std::min(a, b), std::max(a, b));
    };
    const auto tx = taps(out_w, p.width, sx);
    const auto ty = taps(out_h, p.height, sy);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const double top = lerp(p.at(tx[x].i0, ty[y].i0), p.at(tx[x].i1, ty[y].i0), tx[x].f);
            const double bot = lerp(p.at(tx[x].i0, ty[y].i1), p.at(tx[x].i1, ty[y].i1), tx[x].f);
            out.at(x, y) = lerp(top, bot, ty[y].f);
        }
    }
    return out;
}

namespace detail {
inline int nearest_src(int o, int n_out, int n_in) {
    const int s = static_cast<int>(std::floor((o + 0.5) * n_in / static_cast<double>(n_out)));
    return std::clamp(s, 0, n_in - 1);
}
}  // namespace detail

inline BinaryImage resize_nearest(const BinaryImage& b, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw Error(ErrorCode::invalid_argument, "resize target must be at least 1x1");
    BinaryImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const int sy = detail::nearest_src(y, out_h, b.height);
        for (int x = 0; x < out_w; ++x) out.at(x, y) = b.at(detail::nearest_src(x, out_w, b.width), sy);
    }
    return out;
}

inline RasterImage resize_bilinear(const RasterImage& img, int out_w, int out_h) {
    if (out_w == img.width && out_h == img.height) return img;
    RasterImage out(out_w, out_h, img.channels);
    for (int c = 0; c < img.channels; ++c) {
        Plane p(img.width, img.height);
        for (std::size_t i = 0; i < p.size(); ++i) p.data[i] = img.data[i * img.channels + c] / 255.0;
        const Plane r = resize_bilinear(p, out_w, out_h);
        for (std::size_t i = 0; i < r.size(); ++i) out.data[i * img.channels + c] = quantize(r.data[i]);
    }
    return out;
}

/// Affine map of [0,1] onto [-1,1].
inline Plane normalize(const Plane& p) {
    Plane out(p.width, p.height);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double v = p.data[i];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error(ErrorCode::invalid_argument, "normalize expects samples in [0,1], got " + std::to_string(v));
        }
        out.data[i] = (v - 0.5) / 0.5;
    }
    return out;
}

inline Plane denormalize(const Plane& p) {
    Plane out(p.width, p.height);
    for (std::size_t i = 0; i < p.size(); ++i) out.data[i] = std::clamp(p.data[i] * 0.5 + 0.5, 0.0, 1.0);
    return out;
}

/// Pixel-wise min(a + b, 1).
inline Plane saturating_sum(const Plane& a, const Plane& b) {
    require_same_size(a, b, "saturating_sum");
    Plane out(a.width, a.height);
    for (std::size_t i = 0; i < a.size(); ++i) out.data[i] = std::min(a.data[i] + b.data[i], 1.0);
    return out;
}

/// Pads to (w, h) by symmetric reflection on the right and bottom edges.
template <class Img>
Img pad_reflect(const Img& img, int w, int h) {
    if (w == img.width && h == img.height) return img;
    Img out = img;
    out.width = w;
    out.height = h;
    const int ch = img.channels;
    out.data.assign(static_cast<std::size_t>(w) * h * ch, {});
    for (int y = 0; y < h; ++y) {
        const int sy = reflect_index(y, img.height);
        for (int x = 0; x < w; ++x) {
            const int sx = reflect_index(x, img.width);
            for (int c = 0; c < ch; ++c) {
                out.data[(static_cast<std::size_t>(y) * w + x) * ch + c] =
                    img.data[(static_cast<std::size_t>(sy) * img.width + sx) * ch + c];
            }
        }
    }
    return out;
}

template <class Img>
Img crop(const Img& img, int x0, int y0, int w, int h) {
    if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > img.width || y0 + h > img.height) {
        throw Error(ErrorCode::invalid_argument, "crop window outside image");
    }
    Img out = img;
    out.width = w;
    out.height = h;
    const int ch = img.channels;
    out.data.resize(static_cast<std::size_t>(w) * h * ch);
    for (int y = 0; y < h; ++y) {
        const auto src = img.data.begin() + (static_cast<std::ptrdiff_t>(y0 + y) * img.width + x0) * ch;
        std::copy(src, src + static_cast<std::ptrdiff_t>(w) * ch,
                  out.data.begin() + static_cast<std::ptrdiff_t>(y) * w * ch);
    }
    return out;
}

/// Writes `tile` into `dst` at (x0, y0); the tile must fit.
template <class Img>
void paste(Img& dst, const Img& tile, int x0, int y0) {
    const int ch = dst.channels;
    for (int y = 0; y < tile.height; ++y) {
        std::copy(tile.data.begin() + static_cast<std::ptrdiff_t>(y) * tile.width * ch,
                  tile.data.begin() + static_cast<std::ptrdiff_t>(y + 1) * tile.width * ch,
                  dst.data.begin() + (static_cast<std::ptrdiff_t>(y0 + y) * dst.width + x0) * ch);
    }
}

template <class Img>
Img flip_horizontal(const Img& img) {
    Img out = img;
    const int ch = img.channels;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < ch; ++c) {
                out.data[(static_cast<std::size_t>(y) * img.width + x) * ch + c] =
                    img.data[(static_cast<std::size_t>(y) * img.width + (img.width - 1 - x)) * ch + c];
            }
        }
    }
    return out;
}

template <class Img>
Img flip_vertical(const Img& img) {
    Img out = img;
    const std::size_t row = static_cast<std::size_t>(img.width) * img.channels;
    for (int y = 0; y < img.height; ++y) {
        std::copy(img.data.begin() + static_cast<std::ptrdiff_t>((img.height - 1 - y) * row),
                  img.data.begin() + static_cast<std::ptrdiff_t>((img.height - y) * row),
                  out.data.begin() + static_cast<std::ptrdiff_t>(y * row));
    }
    return out;
}

/// Clockwise rotation by a multiple of 90 degrees.
template <class Img>
Img rotate(const Img& img, int degrees) {
    int turns = ((degrees % 360) + 360) % 360;
    if (turns % 90 != 0) throw Error(ErrorCode::invalid_argument, "rotation must be a multiple of 90 degrees");
    turns /= 90;
    if (turns == 0) return img;
    Img out = img;
    const int w = img.width, h = img.height, ch = img.channels;
    if (turns % 2 == 1) {
        out.width = h;
        out.height = w;
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int nx = x, ny = y;
            if (turns == 1) {
                nx = h - 1 - y;
                ny = x;
            } else if (turns == 2) {
                nx = w - 1 - x;
                ny = h - 1 - y;
            } else {
                nx = y;
                ny = w - 1 - x;
            }
            for (int c = 0; c < ch; ++c) {
                out.data[(static_cast<std::size_t>(ny) * out.width + nx) * ch + c] =
                    img.data[(static_cast<std::size_t>(y) * w + x) * ch + c];
            }
        }
    }
    return out;
}

}  // namespace docbin

#endif  // DOCBIN_CORE_IMAGE_HPP
