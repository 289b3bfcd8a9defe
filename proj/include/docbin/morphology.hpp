#ifndef DOCBIN_MORPHOLOGY_HPP
#define DOCBIN_MORPHOLOGY_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "docbin/core/image.hpp"

namespace docbin {

inline std::size_t count_foreground(const BinaryImage& b) {
    std::size_t n = 0;
    for (auto v : b.data) n += v == BinaryImage::foreground;
    return n;
}

/// Zhang-Suen thinning of the foreground (bit 0) until no pixel changes.
/// Pixels outside the image count as background.
inline BinaryImage thin_zhang_suen(const BinaryImage& b) {
    const int w = b.width, h = b.height;
    std::vector<std::uint8_t> fg(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) fg[i] = b.data[i] == BinaryImage::foreground;

    const auto px = [&](int x, int y) -> int {
        if (x < 0 || y < 0 || x >= w || y >= h) return 0;
        return fg[static_cast<std::size_t>(y) * w + x];
    };

    std::vector<std::size_t> doomed;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            doomed.clear();
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    if (!px(x, y)) continue;
                    // P2..P9 clockwise from north.
                    const std::array<int, 8> n = {px(x, y - 1),     px(x + 1, y - 1), px(x + 1, y),
                                                  px(x + 1, y + 1), px(x, y + 1),     px(x - 1, y + 1),
                                                  px(x - 1, y),     px(x - 1, y - 1)};
                    int count = 0, transitions = 0;
                    for (int i = 0; i < 8; ++i) {
                        count += n[i];
                        transitions += (n[i] == 0 && n[(i + 1) % 8] == 1);
                    }
                    if (count < 2 || count > 6 || transitions != 1) continue;
                    const int p2 = n[0], p4 = n[2], p6 = n[4], p8 = n[6];
                    const bool ok = pass == 0 ? (p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0)
                                              : (p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0);
                    if (ok) doomed.push_back(static_cast<std::size_t>(y) * w + x);
                }
            }
            for (auto i : doomed) fg[i] = 0;
            changed = changed || !doomed.empty();
        }
    }

    BinaryImage out(w, h);
    for (std::size_t i = 0; i < fg.size(); ++i) out.data[i] = fg[i] ? BinaryImage::foreground : BinaryImage::background;
    return out;
}

/// Foreground dilation with a 3x3 square structuring element.
inline BinaryImage dilate(const BinaryImage& b, int iterations = 1) {
    BinaryImage cur = b;
    for (int it = 0; it < iterations; ++it) {
        BinaryImage next = cur;
        for (int y = 0; y < cur.height; ++y) {
            for (int x = 0; x < cur.width; ++x) {
                if (!cur.is_fg(x, y)) continue;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (nx >= 0 && ny >= 0 && nx < cur.width && ny < cur.height) {
                            next.at(nx, ny) = BinaryImage::foreground;
                        }
                    }
                }
            }
        }
        cur = std::move(next);
    }
    return cur;
}

}  // namespace docbin

#endif  // DOCBIN_MORPHOLOGY_HPP
