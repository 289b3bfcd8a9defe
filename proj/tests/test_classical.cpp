#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "docbin/classical.hpp"
#include "support/samples.hpp"

namespace docbin {
namespace {

using testing::random_plane;

WindowStats naive_stats(const Plane& p, int window) {
    const int r = window / 2;
    WindowStats st{Plane(p.width, p.height), Plane(p.width, p.height), window};
    for (int y = 0; y < p.height; ++y) {
        for (int x = 0; x < p.width; ++x) {
            double s = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) s += p.at(reflect_index(x + dx, p.width), reflect_index(y + dy, p.height));
            }
            const double m = s / (window * window);
            double v = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    const double d = p.at(reflect_index(x + dx, p.width), reflect_index(y + dy, p.height)) - m;
                    v += d * d;
                }
            }
            st.mean.at(x, y) = m;
            st.stddev.at(x, y) = std::sqrt(v / (window * window));
        }
    }
    return st;
}

// Exhaustive search over thresholds t in [0,254]: lower class = bins <= t.
int brute_force_otsu_bin(const Plane& p) {
    std::array<double, 256> hist{};
    for (double v : p.data) hist[histogram_bin(v)] += 1.0;
    const double n = static_cast<double>(p.size());
    int best_t = -1;
    double best = -1.0;
    for (int t = 0; t < 255; ++t) {
        double w0 = 0, m0 = 0, w1 = 0, m1 = 0;
        for (int i = 0; i <= t; ++i) {
            w0 += hist[i];
            m0 += hist[i] * i;
        }
        for (int i = t + 1; i < 256; ++i) {
            w1 += hist[i];
            m1 += hist[i] * i;
        }
        if (w0 == 0 || w1 == 0) continue;
        m0 /= w0;
        m1 /= w1;
        const double between = (w0 / n) * (w1 / n) * (m0 - m1) * (m0 - m1);
        if (between > best * (1.0 + 1e-12)) {
            best = between;
            best_t = t;
        }
    }
    return best_t;
}

TEST(WindowStats, ConstantPlane) {
    const WindowStats st = window_stats(Plane(10, 7, 0.42), 5);
    for (std::size_t i = 0; i < st.mean.size(); ++i) {
        EXPECT_NEAR(st.mean.data[i], 0.42, 1e-15);
        EXPECT_EQ(st.stddev.data[i], 0.0);
    }
}

TEST(WindowStats, MatchesNaiveOracle) {
    Rng rng(31);
    const Plane p = random_plane(rng, 64, 64);
    for (int window : {1, 3, 7, 25}) {
        const WindowStats fast = window_stats(p, window);
        const WindowStats slow = naive_stats(p, window);
        for (std::size_t i = 0; i < p.size(); ++i) {
            ASSERT_NEAR(fast.mean.data[i], slow.mean.data[i], 1e-6);
            ASSERT_NEAR(fast.stddev.data[i], slow.stddev.data[i], 1e-6);
            ASSERT_GE(fast.stddev.data[i], 0.0);
        }
    }
}

TEST(WindowStats, RuntimeIndependentOfWindow) {
    Rng rng(32);
    const Plane p = random_plane(rng, 1024, 1024);
    auto best_of = [&](int window) {
        double best = 1e9;
        for (int i = 0; i < 3; ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            const WindowStats st = window_stats(p, window);
            const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            EXPECT_EQ(st.mean.size(), p.size());
            best = std::min(best, dt);
        }
        return best;
    };
    const double small = best_of(3), large = best_of(75);
    EXPECT_LE(std::max(small, large) / std::min(small, large), 2.0);
}

TEST(WindowStats, WindowValidation) {
    EXPECT_THROW(window_stats(Plane(4, 4), 4), Error);
    EXPECT_THROW(niblack(Plane(4, 4), 1), Error);
    EXPECT_THROW(sauvola(Plane(4, 4), 11), Error);
    EXPECT_NO_THROW(sauvola(Plane(4, 4), 9));
    EXPECT_THROW(sauvola(Plane(4, 4), 3, 0.2, 0.0), Error);
}

TEST(Otsu, TwoLevelSplit) {
    Plane p(10, 10, 0.1);
    for (int i = 50; i < 100; ++i) p.data[i] = 0.9;
    const OtsuResult r = otsu(p);
    EXPECT_FALSE(r.degenerate);
    EXPECT_GT(r.threshold, 0.1);
    EXPECT_LT(r.threshold, 0.9);
    const int bin = brute_force_otsu_bin(p);
    EXPECT_DOUBLE_EQ(r.threshold, (bin + 0.5) / 255.0);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(r.image.data[i], i < 50 ? BinaryImage::foreground : BinaryImage::background);
}

TEST(Otsu, MatchesExhaustiveSearch) {
    Rng rng(33);
    for (int i = 0; i < 100; ++i) {
        Plane p = random_plane(rng, 16, 16);
        if (i % 3 == 0) {
            for (double& v : p.data) v = v < 0.5 ? 0.2 * v : 0.6 + 0.4 * v;
        }
        const OtsuResult r = otsu(p);
        const int bin = brute_force_otsu_bin(p);
        ASSERT_GE(bin, 0);
        EXPECT_EQ(static_cast<int>(std::lround(r.threshold * 255.0 - 0.5)), bin);
    }
}

TEST(Otsu, ConstantIsDegenerate) {
    const OtsuResult r = otsu(Plane(5, 5, 0.3));
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.image, BinaryImage(5, 5, BinaryImage::background));
}

TEST(Otsu, IdempotentOnBinaryOutput) {
    Rng rng(34);
    const Plane p = random_plane(rng, 20, 20);
    const BinaryImage b = otsu(p).image;
    EXPECT_EQ(otsu(to_plane(b)).image, b);
}

TEST(Niblack, ConstantPlaneIsAllForeground) {
    EXPECT_EQ(niblack(Plane(9, 9, 0.7), 3), BinaryImage(9, 9, BinaryImage::foreground));
}

TEST(Niblack, SingleDarkPixel) {
    Plane p(9, 9, 1.0);
    p.at(4, 4) = 0.0;
    const BinaryImage b = niblack(p, 3);
    EXPECT_TRUE(b.is_fg(4, 4));
    EXPECT_FALSE(b.is_fg(3, 4));
    EXPECT_FALSE(b.is_fg(5, 5));
    EXPECT_TRUE(b.is_fg(0, 0));  // flat window: T equals the mean
}

TEST(LocalThreshold, MatchesNaiveOracle) {
    Rng rng(35);
    for (int i = 0; i < 5; ++i) {
        const Plane p = random_plane(rng, 32, 32);
        const WindowStats st = naive_stats(p, 7);
        const BinaryImage n = niblack(p, 7, -0.2), s = sauvola(p, 7, 0.2, 0.5);
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double tn = st.mean.data[k] - 0.2 * st.stddev.data[k];
            const double ts = st.mean.data[k] * (1.0 + 0.2 * (st.stddev.data[k] / 0.5 - 1.0));
            // Skip pixels within round-off of their threshold.
            if (std::abs(p.data[k] - tn) > 1e-9) EXPECT_EQ(n.data[k] == BinaryImage::foreground, p.data[k] <= tn);
            if (std::abs(p.data[k] - ts) > 1e-9) EXPECT_EQ(s.data[k] == BinaryImage::foreground, p.data[k] <= ts);
        }
    }
}

TEST(Sauvola, ConstantWhiteIsAllBackground) {
    EXPECT_EQ(sauvola(Plane(30, 30, 1.0)), BinaryImage(30, 30, BinaryImage::background));
}

TEST(Polarity, DarkPixelsAreForeground) {
    Plane p(40, 40, 0.85);
    for (int y = 10; y < 30; ++y) {
        for (int x = 18; x < 22; ++x) p.at(x, y) = 0.15;
    }
    for (const BinaryImage& b : {otsu(p).image, sauvola(p, 15), niblack(p, 15)}) {
        EXPECT_TRUE(b.is_fg(20, 20));
        EXPECT_FALSE(b.is_fg(19 - 8, 20));
    }
}

}  // namespace
}  // namespace docbin
