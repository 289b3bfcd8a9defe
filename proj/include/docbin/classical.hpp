#ifndef DOCBIN_CLASSICAL_HPP
#define DOCBIN_CLASSICAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "docbin/core/error.hpp"
#include "docbin/core/image.hpp"

namespace docbin {

/// Per-pixel mean and standard deviation over a (window x window)
/// neighbourhood, borders extended by symmetric reflection.
struct WindowStats {
    Plane mean;
    Plane stddev;
    int window = 0;
};

inline void check_window(const Plane& gray, int window, int min_window) {
    if (window < min_window || window % 2 == 0) {
        throw Error(ErrorCode::invalid_argument,
                    "window must be odd and >= " + std::to_string(min_window) + ", got " + std::to_string(window));
    }
    if (window > 2 * std::max(gray.width, gray.height) + 1) {
        throw Error(ErrorCode::invalid_argument, "window " + std::to_string(window) + " larger than image allows");
    }
}

/// Integral-image implementation; cost does not depend on the window size.
inline WindowStats window_stats(const Plane& gray, int window) {
    check_window(gray, window, 1);
    const int r = window / 2;
    const int w = gray.width, h = gray.height;
    const int pw = w + 2 * r, ph = h + 2 * r;
    // Values are taken relative to the first sample so constant planes give
    // exactly zero sums and the variance keeps its precision.
    const double shift = gray.data.front();

    std::vector<double> s1(static_cast<std::size_t>(pw + 1) * (ph + 1), 0.0);
    std::vector<double> s2(s1.size(), 0.0);
    const auto idx = [pw](int x, int y) { return static_cast<std::size_t>(y) * (pw + 1) + x; };
    for (int y = 0; y < ph; ++y) {
        const int sy = reflect_index(y - r, h);
        double row1 = 0.0, row2 = 0.0;
        for (int x = 0; x < pw; ++x) {
            const double v = gray.at(reflect_index(x - r, w), sy) - shift;
            row1 += v;
            row2 += v * v;
            s1[idx(x + 1, y + 1)] = s1[idx(x + 1, y)] + row1;
            s2[idx(x + 1, y + 1)] = s2[idx(x + 1, y)] + row2;
        }
    }

    WindowStats st{Plane(w, h), Plane(w, h), window};
    const double n = static_cast<double>(window) * window;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // Padded coordinates of the window are [x, x+window) x [y, y+window).
            const int x1 = x + window, y1 = y + window;
            const double a = s1[idx(x1, y1)] - s1[idx(x, y1)] - s1[idx(x1, y)] + s1[idx(x, y)];
            const double b = s2[idx(x1, y1)] - s2[idx(x, y1)] - s2[idx(x1, y)] + s2[idx(x, y)];
            const double m = a / n;
            st.mean.at(x, y) = shift + m;
            st.stddev.at(x, y) = std::sqrt(std::max(0.0, b / n - m * m));
        }
    }
    return st;
}

struct OtsuResult {
    double threshold = 0.0;  // pixels <= threshold are foreground
    BinaryImage image;
    bool degenerate = false;  // single-level input, no separating threshold exists
};

inline int histogram_bin(double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

/// Global Otsu threshold over a 256-bin histogram. Ties resolve to the
/// lowest bin; the reported threshold sits half a bin above it so that the
/// `<=` rule in value space selects exactly the bins of the lower class.
inline OtsuResult otsu(const Plane& gray) {
    std::array<std::int64_t, 256> hist{};
    for (double v : gray.data) ++hist[histogram_bin(v)];

    std::int64_t n0 = 0, s0 = 0, total = 0, sum = 0;
    for (int i = 0; i < 256; ++i) {
        total += hist[i];
        sum += hist[i] * i;
    }
    int best_t = -1;
    long double best = 0.0L;
    for (int t = 0; t < 255; ++t) {
        n0 += hist[t];
        s0 += hist[t] * t;
        const std::int64_t n1 = total - n0, s1 = sum - s0;
        if (n0 == 0 || n1 == 0) continue;
        const long double num = static_cast<long double>(n1) * s0 - static_cast<long double>(n0) * s1;
        const long double v = num * num / (static_cast<long double>(n0) * n1);
        if (v > best) {
            best = v;
            best_t = t;
        }
    }

    OtsuResult r;
    if (best_t < 0) {
        r.degenerate = true;
        r.threshold = 0.0;
        r.image = BinaryImage(gray.width, gray.height, BinaryImage::background);
        return r;
    }
    r.threshold = (best_t + 0.5) / 255.0;
    r.image = BinaryImage(gray.width, gray.height);
    for (std::size_t i = 0; i < gray.size(); ++i) {
        r.image.data[i] = histogram_bin(gray.data[i]) <= best_t ? BinaryImage::foreground : BinaryImage::background;
    }
    return r;
}

struct LocalThresholdParams {
    int window = 25;
    double k = 0.2;
    double r = 0.5;  // Sauvola dynamic range of the standard deviation, 128/255 on a [0,1] scale
};

/// T = mean + k * stddev.
inline BinaryImage niblack(const Plane& gray, int window = 25, double k = -0.2) {
    check_window(gray, window, 3);
    const WindowStats st = window_stats(gray, window);
    BinaryImage out(gray.width, gray.height);
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const double t = st.mean.data[i] + k * st.stddev.data[i];
        out.data[i] = gray.data[i] <= t ? BinaryImage::foreground : BinaryImage::background;
    }
    return out;
}

/// T = mean * (1 + k * (stddev / R - 1)).
inline BinaryImage sauvola(const Plane& gray, int window = 25, double k = 0.2, double r = 0.5) {
    check_window(gray, window, 3);
    if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "Sauvola R must be positive");
    const WindowStats st = window_stats(gray, window);
    BinaryImage out(gray.width, gray.height);
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const double t = st.mean.data[i] * (1.0 + k * (st.stddev.data[i] / r - 1.0));
        out.data[i] = gray.data[i] <= t ? BinaryImage::foreground : BinaryImage::background;
    }
    return out;
}

}  // namespace docbin

#endif  // DOCBIN_CLASSICAL_HPP
