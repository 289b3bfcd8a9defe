#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "docbin/metrics.hpp"
#include "docbin/morphology.hpp"
#include "support/samples.hpp"

namespace docbin {
namespace {

using testing::random_binary;

constexpr auto F = BinaryImage::foreground;
constexpr auto B = BinaryImage::background;

BinaryImage from_bits(int w, int h, std::vector<std::uint8_t> bits) {
    BinaryImage b(w, h);
    b.data = std::move(bits);
    return b;
}

BinaryImage horizontal_stroke(int w, int h, int y, int x0, int x1) {
    BinaryImage b(w, h);
    for (int x = x0; x < x1; ++x) b.at(x, y) = F;
    return b;
}

// ---- confusion / FM ----

TEST(Confusion, Enumerated) {
    const Confusion c = confusion(from_bits(2, 2, {0, 1, 0, 1}), from_bits(2, 2, {0, 0, 1, 1}));
    EXPECT_EQ(c.tp, 1);
    EXPECT_EQ(c.fp, 1);
    EXPECT_EQ(c.fn, 1);
    EXPECT_EQ(c.tn, 1);
    const BinaryImage all_fg(3, 3, F), all_bg(3, 3, B);
    EXPECT_EQ(confusion(all_fg, all_fg).tp, 9);
    EXPECT_EQ(confusion(all_bg, all_fg).fn, 9);
    EXPECT_THROW(confusion(all_fg, BinaryImage(3, 2)), Error);
}

TEST(FMeasure, Values) {
    EXPECT_DOUBLE_EQ(f_measure(Confusion{1, 1, 1, 1}).value, 50.0);
    EXPECT_DOUBLE_EQ(f_measure(Confusion{7, 0, 0, 3}).value, 100.0);
    const Metric none = f_measure(Confusion{0, 2, 3, 1});
    EXPECT_EQ(none.value, 0.0);
    EXPECT_TRUE(none.degenerate);
}

// ---- thinning ----

TEST(Thinning, Fixtures) {
    BinaryImage dot(5, 5);
    dot.at(2, 2) = F;
    EXPECT_EQ(thin_zhang_suen(dot), dot);

    BinaryImage square(5, 5);
    for (int y = 1; y < 4; ++y) {
        for (int x = 1; x < 4; ++x) square.at(x, y) = F;
    }
    EXPECT_EQ(thin_zhang_suen(square), dot);

    const BinaryImage line = horizontal_stroke(12, 5, 2, 1, 11);
    EXPECT_EQ(thin_zhang_suen(line), line);
}

TEST(Thinning, NeverAddsForeground) {
    Rng rng(41);
    for (int i = 0; i < 30; ++i) {
        const BinaryImage b = random_binary(rng, 20, 20, 0.6);
        const BinaryImage t = thin_zhang_suen(b);
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (t.data[k] == F) EXPECT_EQ(b.data[k], F);
        }
        EXPECT_EQ(thin_zhang_suen(t), t);
    }
}

// ---- pseudo F-measure ----

TEST(PseudoFMeasure, IdenticalIsPerfect) {
    Rng rng(42);
    const BinaryImage gt = random_binary(rng, 24, 24, 0.3);
    EXPECT_DOUBLE_EQ(pseudo_f_measure(gt, gt).value, 100.0);
}

TEST(PseudoFMeasure, ThickenedStrokeIsForgiven) {
    const BinaryImage gt = horizontal_stroke(20, 9, 4, 3, 17);
    const BinaryImage pred = dilate(gt, 1);
    EXPECT_DOUBLE_EQ(pseudo_f_measure(pred, gt).value, 100.0);
    EXPECT_LT(f_measure(confusion(pred, gt)).value, 100.0);
}

TEST(PseudoFMeasure, HalfSkeletonMissed) {
    const BinaryImage gt = horizontal_stroke(24, 5, 2, 2, 22);
    const BinaryImage pred = horizontal_stroke(24, 5, 2, 2, 12);
    EXPECT_NEAR(pseudo_f_measure(pred, gt).value, 200.0 / 3.0, 1e-9);
}

TEST(PseudoFMeasure, EmptyGroundTruthIsDegenerate) {
    EXPECT_TRUE(pseudo_f_measure(BinaryImage(4, 4, F), BinaryImage(4, 4)).degenerate);
}

// ---- PSNR ----

TEST(Psnr, Values) {
    EXPECT_NEAR(psnr(from_bits(2, 2, {0, 1, 1, 1}), BinaryImage(2, 2)).value, 10.0 * std::log10(4.0), 1e-12);
    EXPECT_NEAR(psnr(from_bits(2, 2, {0, 1, 1, 1}), BinaryImage(2, 2)).value, 6.0206, 5e-5);
    EXPECT_DOUBLE_EQ(psnr(BinaryImage(3, 3, F), BinaryImage(3, 3, B)).value, 0.0);
    const Metric same = psnr(BinaryImage(3, 3), BinaryImage(3, 3));
    EXPECT_TRUE(same.degenerate);
    EXPECT_EQ(same.value, std::numeric_limits<double>::infinity());
}

TEST(Psnr, StrictlyDecreasingInFlips) {
    const BinaryImage gt(10, 10);
    BinaryImage pred = gt;
    double last = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100; ++i) {
        pred.data[i] = F;
        const double v = psnr(pred, gt).value;
        EXPECT_LT(v, last);
        last = v;
    }
}

// ---- DRD ----

TEST(DrdWeights, NormalizedAndSymmetric) {
    const DrdWeights w = DrdWeights::make();
    double sum = 0.0;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            sum += w.w[i][j];
            EXPECT_DOUBLE_EQ(w.w[i][j], w.w[4 - i][j]);
            EXPECT_DOUBLE_EQ(w.w[i][j], w.w[i][4 - j]);
            EXPECT_DOUBLE_EQ(w.w[i][j], w.w[j][i]);
        }
    }
    EXPECT_EQ(w.w[2][2], 0.0);
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(w.w[2][3] / w.w[1][1], std::sqrt(2.0), 1e-12);
}

TEST(Drd, SingleInteriorFlip) {
    BinaryImage gt(24, 24);
    gt.at(0, 0) = F;
    gt.at(9, 1) = F;
    gt.at(2, 12) = F;
    ASSERT_EQ(nubn(gt), 3);
    BinaryImage pred = gt;
    pred.at(18, 18) = F;
    const Metric d = drd(pred, gt);
    EXPECT_FALSE(d.degenerate);
    EXPECT_NEAR(d.value, 1.0 / 3.0, 1e-15);
    EXPECT_EQ(drd(gt, gt).value, 0.0);
}

TEST(Drd, NoMixedBlockIsDegenerate) {
    BinaryImage pred(16, 16);
    pred.at(5, 5) = F;
    const Metric d = drd(pred, BinaryImage(16, 16));
    EXPECT_TRUE(d.degenerate);
    EXPECT_NEAR(d.value, 1.0, 1e-15);
}

TEST(Drd, PartialEdgeBlocksCount) {
    BinaryImage gt(10, 10);
    gt.at(9, 9) = F;
    EXPECT_EQ(nubn(gt), 1);
}

TEST(Drd, MonotoneUnderAdditionalFlips) {
    Rng rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        const BinaryImage gt = random_binary(rng, 16, 16, 0.3);
        BinaryImage pred = gt;
        std::vector<std::size_t> order(gt.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order.begin(), order.end());
        double last = 0.0;
        for (int k = 0; k < 40; ++k) {
            pred.data[order[k]] ^= 1;
            const double v = drd(pred, gt).value;
            ASSERT_GE(v, last);
            last = v;
        }
    }
}

// ---- report ----

TEST(EvaluateAll, IdenticalImages) {
    Rng rng(44);
    const BinaryImage gt = random_binary(rng, 20, 20, 0.4);
    const MetricsReport r = evaluate_all(gt, gt);
    EXPECT_EQ(r.fm.value, 100.0);
    EXPECT_EQ(r.pfm.value, 100.0);
    EXPECT_EQ(r.psnr.value, std::numeric_limits<double>::infinity());
    EXPECT_TRUE(r.psnr.degenerate);
    EXPECT_EQ(r.drd.value, 0.0);
    EXPECT_THROW(evaluate_all(gt, BinaryImage(20, 19)), Error);
}

TEST(EvaluateAll, RangesOnRandomPairs) {
    Rng rng(45);
    for (int i = 0; i < 20; ++i) {
        const BinaryImage gt = random_binary(rng, 18, 18, 0.3), pred = random_binary(rng, 18, 18, 0.3);
        const MetricsReport r = evaluate_all(pred, gt);
        EXPECT_GE(r.fm.value, 0.0);
        EXPECT_LE(r.fm.value, 100.0);
        EXPECT_GE(r.pfm.value, 0.0);
        EXPECT_LE(r.pfm.value, 100.0);
        EXPECT_GT(r.psnr.value, 0.0);
        EXPECT_GE(r.drd.value, 0.0);
    }
}

}  // namespace
}  // namespace docbin
