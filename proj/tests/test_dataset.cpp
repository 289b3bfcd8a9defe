#include <gtest/gtest.h>

#include <fstream>

#include "docbin/classical.hpp"
#include "docbin/dataset/manifest.hpp"
#include "docbin/dataset/synth.hpp"
#include "docbin/metrics.hpp"
#include "support/samples.hpp"

namespace docbin {
namespace {

using testing::random_binary;
using testing::random_raster;
using testing::TempDir;

PatchConfig config(std::vector<double> scales, std::vector<int> rotations, int patch) {
    PatchConfig c;
    c.scales = std::move(scales);
    c.rotations = std::move(rotations);
    c.patch_size = patch;
    return c;
}

// ---- patches ----

TEST(Patches, SingleTile) {
    const RasterImage img(224, 224, 3, 200);
    EXPECT_EQ(extract_patches(img, BinaryImage(224, 224), config({1.0}, {0}, 224)).size(), 1u);
}

TEST(Patches, TwoTilesFourRotations) {
    const RasterImage img(448, 224, 3, 200);
    const auto recs = extract_patches(img, BinaryImage(448, 224), config({1.0}, {0, 90, 180, 270}, 224));
    EXPECT_EQ(recs.size(), 8u);
}

TEST(Patches, CountMatchesEnumeration) {
    Rng rng(51);
    const PatchConfig cfg = config({0.75, 1.0, 1.25, 1.5}, {0, 90, 180, 270}, 16);
    for (int i = 0; i < 200; ++i) {
        const int w = rng.uniform_int(1, 70), h = rng.uniform_int(1, 70);
        // Independent count: tiles needed to cover each scaled extent.
        std::size_t expected = 0;
        for (double s : cfg.scales) {
            const long sw = std::max(1L, std::lround(s * w)), sh = std::max(1L, std::lround(s * h));
            long nx = 0, ny = 0;
            while (nx * 16 < sw) ++nx;
            while (ny * 16 < sh) ++ny;
            expected += static_cast<std::size_t>(nx * ny) * cfg.rotations.size();
        }
        EXPECT_EQ(expected_patch_count(w, h, cfg), expected);
        if (i % 20 == 0) {
            const RasterImage img = random_raster(rng, w, h, 1);
            EXPECT_EQ(extract_patches(img, random_binary(rng, w, h), cfg).size(), expected);
        }
    }
}

TEST(Patches, ShapesAndBinaryGroundTruth) {
    Rng rng(52);
    const RasterImage img = random_raster(rng, 37, 23, 3);
    const BinaryImage gt = random_binary(rng, 37, 23);
    for (const auto& r : extract_patches(img, gt, config({0.75, 1.5}, {0, 90}, 16), "doc")) {
        EXPECT_EQ(r.patch.width, 16);
        EXPECT_EQ(r.patch.height, 16);
        EXPECT_EQ(r.gt_patch.width, 16);
        EXPECT_EQ(r.source_id, "doc");
        for (auto v : r.gt_patch.data) EXPECT_TRUE(v == 0 || v == 1);
    }
}

TEST(Patches, UnrotatedTilesReassembleSource) {
    Rng rng(53);
    const RasterImage img = random_raster(rng, 40, 27, 1);
    const auto recs = extract_patches(img, BinaryImage(40, 27), config({1.0}, {0}, 16));
    RasterImage canvas(48, 32, 1);
    for (const auto& r : recs) paste(canvas, r.patch, r.grid_x * 16, r.grid_y * 16);
    EXPECT_EQ(crop(canvas, 0, 0, 40, 27), img);
}

TEST(Patches, RotatedRecordsAreRotationsOfTheTile) {
    Rng rng(54);
    const RasterImage img = random_raster(rng, 16, 16, 3);
    const auto recs = extract_patches(img, BinaryImage(16, 16), config({1.0}, {0, 90, 180, 270}, 16));
    ASSERT_EQ(recs.size(), 4u);
    for (const auto& r : recs) EXPECT_EQ(rotate(r.patch, 360 - r.rotation), recs[0].patch);
}

TEST(Patches, InvalidConfig) {
    const RasterImage img(4, 4, 1);
    EXPECT_THROW(extract_patches(img, BinaryImage(4, 4), config({1.0}, {45}, 4)), Error);
    EXPECT_THROW(extract_patches(img, BinaryImage(4, 4), config({0.0}, {0}, 4)), Error);
    EXPECT_THROW(extract_patches(img, BinaryImage(5, 4), config({1.0}, {0}, 4)), Error);
}

// ---- global augmentation ----

TEST(GlobalAugment, ThreeFlipsPerSource) {
    Rng rng(55);
    const RasterImage img = random_raster(rng, 30, 20, 3);
    const auto recs = global_augment(img, random_binary(rng, 30, 20), 32, "a");
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0].flip, Flip::identity);
    EXPECT_EQ(recs[1].flip, Flip::horizontal);
    EXPECT_EQ(recs[2].flip, Flip::vertical);
    EXPECT_EQ(recs[0].image.width, 32);
    EXPECT_EQ(flip_horizontal(recs[1].image), recs[0].image);
    EXPECT_EQ(flip_vertical(recs[2].gt), recs[0].gt);
}

TEST(GlobalAugment, SymmetricSourceGivesIdenticalPayloads) {
    const RasterImage img(8, 8, 1, 90);
    const auto recs = global_augment(img, BinaryImage(8, 8), 16);
    EXPECT_EQ(recs[0].image, recs[1].image);
    EXPECT_EQ(recs[0].image, recs[2].image);
}

// ---- synthetic documents ----

TEST(Synth, DeterministicPerSeed) {
    const SynthSpec s = SynthSpec::hard(9, 64, 48);
    const SynthDocument a = synth_document(s), b = synth_document(s);
    EXPECT_EQ(a.degraded, b.degraded);
    EXPECT_EQ(a.gt, b.gt);
    EXPECT_NE(synth_document(SynthSpec::hard(10, 64, 48)).degraded, a.degraded);
    for (auto v : a.gt.data) EXPECT_TRUE(v == 0 || v == 1);
    EXPECT_GT(count_foreground(a.gt), 0u);
}

TEST(Synth, ZeroDegradationIsCleanRender) {
    SynthSpec s;
    s.seed = 4;
    const SynthDocument d = synth_document(s);
    const auto clean = render_clean(d.gt, s);
    EXPECT_EQ(d.degraded, merge_rgb(clean[0], clean[1], clean[2]));
    EXPECT_DOUBLE_EQ(f_measure(confusion(otsu(to_gray(d.degraded)).image, d.gt)).value, 100.0);
}

TEST(Synth, HardSpecDefeatsGlobalOtsu) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const SynthSpec hard = SynthSpec::hard(seed);
        SynthSpec clean = hard;
        clean.gradient_amplitude = clean.bleed_opacity = clean.noise_sigma = 0.0;
        clean.stain_count = 0;
        const SynthDocument a = synth_document(clean), b = synth_document(hard);
        EXPECT_EQ(a.gt, b.gt);
        const double fa = f_measure(confusion(otsu(to_gray(a.degraded)).image, a.gt)).value;
        const double fb = f_measure(confusion(otsu(to_gray(b.degraded)).image, b.gt)).value;
        EXPECT_GE(fa - fb, 10.0) << "seed " << seed << ": " << fa << " vs " << fb;
    }
}

TEST(Synth, InvalidSpec) {
    SynthSpec s;
    s.width = 0;
    EXPECT_THROW(synth_document(s), Error);
    s = SynthSpec();
    s.bleed_opacity = 1.5;
    EXPECT_THROW(synth_document(s), Error);
}

// ---- manifest ----

Manifest small_manifest(const PatchConfig& cfg) {
    Manifest m;
    m.seed = 17;
    m.patch_size = cfg.patch_size;
    m.global_size = 24;
    for (int i = 0; i < 2; ++i) {
        const SynthDocument d = synth_document(SynthSpec::hard(100 + i, 40, 30));
        const std::string id = "doc" + std::to_string(i);
        auto p = extract_patches(d.degraded, d.gt, cfg, id);
        m.patches.insert(m.patches.end(), p.begin(), p.end());
        auto g = global_augment(d.degraded, d.gt, 24, id);
        m.globals.insert(m.globals.end(), g.begin(), g.end());
    }
    m.sort();
    return m;
}

TEST(Manifest, RoundTripAndCounts) {
    TempDir dir("manifest");
    const PatchConfig cfg = config({1.0}, {0, 90, 180, 270}, 16);
    const Manifest m = small_manifest(cfg);
    for (const auto& [id, c] : m.counts()) {
        EXPECT_EQ(c.patches, expected_patch_count(40, 30, cfg)) << id;
        EXPECT_EQ(c.globals, 3u);
    }
    write_manifest(m, dir.path());
    EXPECT_EQ(read_manifest(dir.path()), m);
}

TEST(Manifest, ByteIdenticalRewrites) {
    TempDir a("manifest-a"), b("manifest-b");
    const Manifest m = small_manifest(config({0.75, 1.0}, {0, 180}, 16));
    write_manifest(m, a.path());
    Manifest shuffled = m;
    std::reverse(shuffled.patches.begin(), shuffled.patches.end());
    write_manifest(shuffled, b.path());
    const auto read = [](const std::filesystem::path& p) { return detail::read_bytes(p / kManifestFile); };
    EXPECT_EQ(read(a.path()), read(b.path()));
}

TEST(Manifest, TamperedPayloadFailsChecksum) {
    TempDir dir("manifest-tamper");
    const Manifest m = small_manifest(config({1.0}, {0}, 16));
    write_manifest(m, dir.path());
    const auto victim = dir / "patches/doc0_s1_r0_x0_y0.ppm";
    ASSERT_TRUE(std::filesystem::exists(victim));
    auto bytes = detail::read_bytes(victim);
    bytes.back() ^= 0xff;
    write_bytes(victim, bytes);
    try {
        read_manifest(dir.path());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::checksum_mismatch);
    }
    std::filesystem::remove(victim);
    try {
        read_manifest(dir.path());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::missing_file);
    }
}

TEST(Manifest, MissingManifestAndBadSourceId) {
    TempDir dir("manifest-missing");
    EXPECT_THROW(read_manifest(dir.path()), Error);
    Manifest m;
    GlobalRecord g{"bad/id", Flip::identity, RasterImage(2, 2, 1), BinaryImage(2, 2)};
    m.globals.push_back(g);
    EXPECT_THROW(write_manifest(m, dir.path()), Error);
}

TEST(Manifest, EmptyManifestRoundTrips) {
    TempDir dir("manifest-empty");
    Manifest m;
    m.seed = 3;
    write_manifest(m, dir.path());
    EXPECT_EQ(read_manifest(dir.path()), m);
}

}  // namespace
}  // namespace docbin
