#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "docbin/core/image.hpp"
#include "docbin/core/netpbm.hpp"
#include "support/samples.hpp"

namespace docbin {
namespace {

using testing::random_plane;
using testing::random_raster;
using testing::TempDir;

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

// ---- netpbm ----

TEST(Netpbm, SmallestLegalPgm) {
    std::vector<std::uint8_t> b = bytes_of("P5\n1 1\n255\n");
    b.push_back(0);
    const RasterImage img = decode_netpbm(b);
    EXPECT_EQ(img, RasterImage(1, 1, 1, 0));
}

TEST(Netpbm, HandWrittenPpm) {
    std::vector<std::uint8_t> b = bytes_of("P6\n# four primaries\n2 2\n255\n");
    for (int v : {255, 0, 0, 0, 255, 0, 0, 0, 255, 255, 255, 255}) b.push_back(static_cast<std::uint8_t>(v));
    const RasterImage img = decode_netpbm(b);
    ASSERT_EQ(img.channels, 3);
    EXPECT_EQ(img.width, 2);
    EXPECT_EQ(img.height, 2);
    EXPECT_EQ(img.at(0, 0, 0), 255);
    EXPECT_EQ(img.at(1, 0, 1), 255);
    EXPECT_EQ(img.at(0, 1, 2), 255);
    EXPECT_EQ(img.at(1, 1, 0), 255);
    std::vector<std::uint8_t> expected = bytes_of("P6\n2 2\n255\n");
    expected.insert(expected.end(), img.data.begin(), img.data.end());
    EXPECT_EQ(encode_netpbm(img), expected);
}

TEST(Netpbm, ErrorsAreDistinct) {
    auto code_of = [](const std::vector<std::uint8_t>& b) {
        try {
            decode_netpbm(b);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::invalid_argument;
    };
    EXPECT_EQ(code_of(bytes_of("P5\n2 2\n255\n\x01")), ErrorCode::truncated_data);
    EXPECT_EQ(code_of(bytes_of("P2\n1 1\n255\n0")), ErrorCode::unsupported_format);
    EXPECT_EQ(code_of(bytes_of("P5\n1 1\n65535\n\x00\x00")), ErrorCode::unsupported_format);
    EXPECT_EQ(code_of(bytes_of("P5\nx 1\n255\n\x00")), ErrorCode::corrupt_header);
    EXPECT_EQ(code_of(bytes_of("GIF89a")), ErrorCode::unsupported_format);
}

TEST(Netpbm, RoundTripIsBitExact) {
    Rng rng(11);
    TempDir dir("netpbm");
    for (int i = 0; i < 50; ++i) {
        const RasterImage img = random_raster(rng, rng.uniform_int(1, 40), rng.uniform_int(1, 40), i % 2 ? 3 : 1);
        const auto path = dir / ("img" + std::to_string(i) + (img.channels == 3 ? ".ppm" : ".pgm"));
        save_image(img, path);
        EXPECT_EQ(load_image(path), img);
        const auto bytes = detail::read_bytes(path);
        EXPECT_EQ(bytes[1], img.channels == 3 ? '6' : '5');
    }
}

TEST(Netpbm, MissingFileAndUnwritablePath) {
    TempDir dir("netpbm-io");
    try {
        load_image(dir / "absent.pgm");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::unreadable_file);
        EXPECT_TRUE(e.is_io());
    }
    EXPECT_THROW(save_image(RasterImage(1, 1, 1), dir / "no/such/dir/x.pgm"), Error);
}

// ---- channels ----

TEST(Channels, PrimaryAndExtremes) {
    RasterImage img(3, 1, 3);
    img.at(0, 0, 0) = 255;
    for (int c = 0; c < 3; ++c) img.at(1, 0, c) = 255;
    const ChannelSet ch = split_channels(img);
    EXPECT_DOUBLE_EQ(ch.red.at(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(ch.green.at(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(ch.blue.at(0, 0), 0.0);
    EXPECT_NEAR(ch.gray.at(0, 0), 0.299, 1e-12);
    for (int c = 0; c < 4; ++c) {
        EXPECT_NEAR(ch[c].at(1, 0), 1.0, 1e-12);
        EXPECT_EQ(ch[c].at(2, 0), 0.0);
    }
}

TEST(Channels, GrayIsLumaEverywhere) {
    Rng rng(3);
    const RasterImage img = random_raster(rng, 17, 9, 3);
    const ChannelSet ch = split_channels(img);
    for (std::size_t i = 0; i < ch.gray.size(); ++i) {
        for (int c = 0; c < 4; ++c) {
            EXPECT_GE(ch[c].data[i], 0.0);
            EXPECT_LE(ch[c].data[i], 1.0);
        }
        EXPECT_NEAR(ch.gray.data[i], 0.299 * ch.red.data[i] + 0.587 * ch.green.data[i] + 0.114 * ch.blue.data[i],
                    1e-9);
    }
}

TEST(Channels, SingleChannelRejected) {
    try {
        split_channels(RasterImage(2, 2, 1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
        EXPECT_NE(std::string(e.what()).find("to_gray"), std::string::npos);
    }
}

// ---- resize ----

TEST(Resize, ConstantAndIdentity) {
    Rng rng(5);
    EXPECT_EQ(resize_bilinear(Plane(7, 5, 0.3), 13, 2), Plane(13, 2, 0.3));
    const Plane p = random_plane(rng, 9, 4);
    EXPECT_EQ(resize_bilinear(p, 9, 4), p);
    EXPECT_THROW(resize_bilinear(p, 0, 4), Error);
}

TEST(Resize, TwoByOneToFourByOne) {
    Plane p(2, 1);
    p.data = {0.0, 1.0};
    const Plane r = resize_bilinear(p, 4, 1);
    // Half-pixel centres map to source positions -0.25, 0.25, 0.75, 1.25.
    const std::vector<double> expected = {0.0, 0.25, 0.75, 1.0};
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(r.data[i], expected[i], 1e-12);
}

TEST(Resize, StaysWithinSourceRange) {
    Rng rng(8);
    for (int i = 0; i < 40; ++i) {
        const Plane p = random_plane(rng, rng.uniform_int(1, 20), rng.uniform_int(1, 20));
        const auto [lo, hi] = std::minmax_element(p.data.begin(), p.data.end());
        const Plane r = resize_bilinear(p, rng.uniform_int(1, 50), rng.uniform_int(1, 50));
        for (double v : r.data) {
            EXPECT_GE(v, *lo);
            EXPECT_LE(v, *hi);
        }
    }
}

// ---- normalize / saturating sum ----

TEST(Normalize, AffineValues) {
    Plane p(4, 1);
    p.data = {0.5, 0.0, 1.0, 0.25};
    const Plane n = normalize(p);
    EXPECT_EQ(n.data, (std::vector<double>{0.0, -1.0, 1.0, -0.5}));
    p.data[0] = 1.5;
    EXPECT_THROW(normalize(p), Error);
}

TEST(Normalize, InverseRecoversInput) {
    Rng rng(9);
    const Plane p = random_plane(rng, 31, 7);
    const Plane back = denormalize(normalize(p));
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(back.data[i], p.data[i], 1e-9);
}

TEST(SaturatingSum, Cases) {
    Plane a(3, 1), b(3, 1);
    a.data = {0.0, 1.0, 0.4};
    b.data = {0.7, 1.0, 0.5};
    const Plane s = saturating_sum(a, b);
    EXPECT_DOUBLE_EQ(s.data[0], 0.7);
    EXPECT_DOUBLE_EQ(s.data[1], 1.0);
    EXPECT_NEAR(s.data[2], 0.9, 1e-15);
    EXPECT_THROW(saturating_sum(a, Plane(2, 1)), Error);
}

TEST(SaturatingSum, CommutativeAndMonotone) {
    Rng rng(10);
    for (int i = 0; i < 20; ++i) {
        const Plane a = random_plane(rng, 8, 8), b = random_plane(rng, 8, 8);
        Plane bigger = b;
        for (double& v : bigger.data) v = std::min(1.0, v + rng.uniform(0.0, 0.3));
        const Plane ab = saturating_sum(a, b);
        EXPECT_EQ(ab, saturating_sum(b, a));
        const Plane ab2 = saturating_sum(a, bigger);
        for (std::size_t k = 0; k < ab.size(); ++k) EXPECT_LE(ab.data[k], ab2.data[k]);
    }
}

// ---- geometry helpers ----

TEST(Geometry, RotationFourTimesIsIdentity) {
    Rng rng(12);
    const RasterImage img = random_raster(rng, 5, 3, 3);
    RasterImage r = img;
    for (int i = 0; i < 4; ++i) r = rotate(r, 90);
    EXPECT_EQ(r, img);
    EXPECT_EQ(rotate(img, 90).width, 3);
    EXPECT_EQ(rotate(rotate(img, 90), 270), img);
    EXPECT_EQ(rotate(img, 180), flip_vertical(flip_horizontal(img)));
}

TEST(Geometry, ReflectIndex) {
    EXPECT_EQ(reflect_index(-1, 4), 0);
    EXPECT_EQ(reflect_index(-2, 4), 1);
    EXPECT_EQ(reflect_index(4, 4), 3);
    EXPECT_EQ(reflect_index(5, 4), 2);
    EXPECT_EQ(reflect_index(9, 1), 0);
}

}  // namespace
}  // namespace docbin
