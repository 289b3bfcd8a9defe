#include <gtest/gtest.h>

#include <cmath>

#include "docbin/wavelet.hpp"
#include "support/samples.hpp"

namespace docbin {
namespace {

using testing::random_plane;

double max_abs_diff(const Plane& a, const Plane& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

TEST(Dwt, ConstantPlaneHasNoDetail) {
    const Subbands s = dwt2_forward(Plane(6, 5, 0.37));
    EXPECT_EQ(s.ll, Plane(3, 3, 0.37));
    for (const Plane* band : {&s.lh, &s.hl, &s.hh}) {
        for (double v : band->data) EXPECT_EQ(v, 0.0);
    }
}

TEST(Dwt, HandEvaluatedBlock) {
    Plane p(2, 2);
    p.data = {0.0, 1.0, 1.0, 0.0};
    const Subbands s = dwt2_forward(p);
    EXPECT_DOUBLE_EQ(s.ll.data[0], 0.5);
    EXPECT_DOUBLE_EQ(s.lh.data[0], 0.0);
    EXPECT_DOUBLE_EQ(s.hl.data[0], 0.0);
    EXPECT_DOUBLE_EQ(s.hh.data[0], -0.5);
}

TEST(Dwt, OddSizeReflectsLastRowAndColumn) {
    Plane p(3, 3);
    for (int i = 0; i < 9; ++i) p.data[i] = i;  // rows 0 1 2 / 3 4 5 / 6 7 8
    const Subbands s = dwt2_forward(p);
    ASSERT_EQ(s.ll.width, 2);
    ASSERT_EQ(s.ll.height, 2);
    // Right column block duplicates column 2: [2 2; 5 5] -> 3.5.
    EXPECT_DOUBLE_EQ(s.ll.at(1, 0), 3.5);
    // Bottom block duplicates row 2: [6 7; 6 7] -> 6.5.
    EXPECT_DOUBLE_EQ(s.ll.at(0, 1), 6.5);
    EXPECT_DOUBLE_EQ(s.ll.at(1, 1), 8.0);
    const Plane back = dwt2_inverse(s);
    EXPECT_EQ(back.width, 3);
    EXPECT_LE(max_abs_diff(back, p), 1e-12);
}

TEST(Dwt, InverseOfConstantSubbands) {
    Subbands s{Plane(2, 3, 0.6), Plane(2, 3), Plane(2, 3), Plane(2, 3), 4, 5};
    EXPECT_EQ(dwt2_inverse(s), Plane(4, 5, 0.6));
}

TEST(Dwt, PerfectReconstructionBothParities) {
    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
        const Plane p = random_plane(rng, rng.uniform_int(1, 33), rng.uniform_int(1, 33), -1.0, 1.0);
        EXPECT_LE(max_abs_diff(dwt2_inverse(dwt2_forward(p)), p), 1e-9);
    }
    const Plane odd = random_plane(rng, 5, 7);
    EXPECT_LE(max_abs_diff(dwt2_inverse(dwt2_forward(odd)), odd), 1e-9);
}

TEST(Dwt, InconsistentSubbandsRejected) {
    Subbands s = dwt2_forward(Plane(4, 4, 0.1));
    s.hh = Plane(3, 2);
    EXPECT_THROW(dwt2_inverse(s), Error);
    s = dwt2_forward(Plane(4, 4, 0.1));
    s.source_width = 7;
    EXPECT_THROW(dwt2_inverse(s), Error);
    EXPECT_THROW(dwt2_forward(Plane()), Error);
}

TEST(Dwt, Linearity) {
    Rng rng(22);
    const Plane p = random_plane(rng, 9, 6), q = random_plane(rng, 9, 6);
    const double a = 0.7, b = -1.3;
    Plane mix(9, 6);
    for (std::size_t i = 0; i < mix.size(); ++i) mix.data[i] = a * p.data[i] + b * q.data[i];
    const Subbands sm = dwt2_forward(mix), sp = dwt2_forward(p), sq = dwt2_forward(q);
    const Plane Subbands::*bands[] = {&Subbands::ll, &Subbands::lh, &Subbands::hl, &Subbands::hh};
    for (auto band : bands) {
        for (std::size_t i = 0; i < (sm.*band).size(); ++i) {
            EXPECT_NEAR((sm.*band).data[i], a * (sp.*band).data[i] + b * (sq.*band).data[i], 1e-9);
        }
    }
}

TEST(Dwt, LowBandStaysInRangeAndKeepsPaddedMean) {
    Rng rng(23);
    for (int i = 0; i < 30; ++i) {
        const int w = rng.uniform_int(1, 20), h = rng.uniform_int(1, 20);
        const Plane p = random_plane(rng, w, h);
        const Plane ll = extract_ll(p);
        const auto [lo, hi] = std::minmax_element(p.data.begin(), p.data.end());
        double padded = 0.0;
        const int pw = 2 * ll.width, ph = 2 * ll.height;
        for (int y = 0; y < ph; ++y) {
            for (int x = 0; x < pw; ++x) padded += p.at(reflect_index(x, w), reflect_index(y, h));
        }
        double sum = 0.0;
        for (double v : ll.data) {
            EXPECT_GE(v, *lo - 1e-15);
            EXPECT_LE(v, *hi + 1e-15);
            sum += v;
        }
        EXPECT_NEAR(sum / ll.size(), padded / (pw * ph), 1e-9);
    }
}

TEST(Dwt, CheckerboardAndRamp) {
    Plane board(6, 4);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 6; ++x) board.at(x, y) = (x + y) % 2;
    }
    EXPECT_EQ(extract_ll(board), Plane(3, 2, 0.5));

    Plane ramp(4, 4);
    for (int i = 0; i < 16; ++i) ramp.data[i] = i;
    const Plane ll = extract_ll(ramp);
    EXPECT_EQ(ll.data, (std::vector<double>{2.5, 4.5, 10.5, 12.5}));
}

}  // namespace
}  // namespace docbin
