#ifndef DOCBIN_WAVELET_HPP
#define DOCBIN_WAVELET_HPP

#include "docbin/core/error.hpp"
#include "docbin/core/image.hpp"

namespace docbin {

/// One level of a 2-D Haar decomposition. Each band is ceil(source/2) in
/// each axis; the source size is kept so the inverse can crop exactly.
struct Subbands {
    Plane ll;
    Plane lh;
    Plane hl;
    Plane hh;
    int source_width = 0;
    int source_height = 0;
};

/// Haar analysis with averaging normalization. For each 2x2 block
/// [a b; c d]:
///   LL = (a+b+c+d)/4   LH = (a+b-c-d)/4
///   HL = (a-b+c-d)/4   HH = (a-b-c+d)/4
/// Odd widths/heights are first extended by symmetric reflection, which
/// duplicates the last row/column.
inline Subbands dwt2_forward(const Plane& p) {
    if (p.width < 1 || p.height < 1 || p.data.size() != static_cast<std::size_t>(p.width) * p.height) {
        throw Error(ErrorCode::invalid_argument, "dwt2_forward needs a non-empty plane");
    }
    const int bw = (p.width + 1) / 2;
    const int bh = (p.height + 1) / 2;
    Subbands s{Plane(bw, bh), Plane(bw, bh), Plane(bw, bh), Plane(bw, bh), p.width, p.height};
    for (int by = 0; by < bh; ++by) {
        const int y0 = 2 * by;
        const int y1 = reflect_index(2 * by + 1, p.height);
        for (int bx = 0; bx < bw; ++bx) {
            const int x0 = 2 * bx;
            const int x1 = reflect_index(2 * bx + 1, p.width);
            const double a = p.at(x0, y0), b = p.at(x1, y0);
            const double c = p.at(x0, y1), d = p.at(x1, y1);
            s.ll.at(bx, by) = (a + b + c + d) / 4.0;
            s.lh.at(bx, by) = (a + b - c - d) / 4.0;
            s.hl.at(bx, by) = (a - b + c - d) / 4.0;
            s.hh.at(bx, by) = (a - b - c + d) / 4.0;
        }
    }
    return s;
}

/// Synthesis: a = LL+LH+HL+HH, b = LL+LH-HL-HH, c = LL-LH+HL-HH,
/// d = LL-LH-HL+HH, cropped back to the recorded source size.
inline Plane dwt2_inverse(const Subbands& s) {
    const int bw = s.ll.width, bh = s.ll.height;
    for (const Plane* band : {&s.lh, &s.hl, &s.hh}) {
        if (band->width != bw || band->height != bh) {
            throw Error(ErrorCode::dimension_mismatch, "subband planes differ in size");
        }
    }
    if (s.source_width < 1 || s.source_height < 1 || (s.source_width + 1) / 2 != bw ||
        (s.source_height + 1) / 2 != bh) {
        throw Error(ErrorCode::dimension_mismatch, "recorded source size does not match subband size");
    }
    Plane out(s.source_width, s.source_height);
    for (int by = 0; by < bh; ++by) {
        for (int bx = 0; bx < bw; ++bx) {
            const double ll = s.ll.at(bx, by), lh = s.lh.at(bx, by);
            const double hl = s.hl.at(bx, by), hh = s.hh.at(bx, by);
            const double px[2][2] = {{ll + lh + hl + hh, ll + lh - hl - hh}, {ll - lh + hl - hh, ll - lh - hl + hh}};
            for (int dy = 0; dy < 2; ++dy) {
                const int y = 2 * by + dy;
                if (y >= out.height) continue;
                for (int dx = 0; dx < 2; ++dx) {
                    const int x = 2 * bx + dx;
                    if (x < out.width) out.at(x, y) = px[dy][dx];
                }
            }
        }
    }
    return out;
}

/// Low-low band only (half-resolution block means).
inline Plane extract_ll(const Plane& p) { return dwt2_forward(p).ll; }

}  // namespace docbin

#endif  // DOCBIN_WAVELET_HPP
