#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cgvd/error.hpp"
#include "cgvd/mask.hpp"
#include "cgvd/rle.hpp"
#include "support.hpp"

using namespace cgvd;
using testutil::brute_dilate;

TEST_CASE("binarize threshold uses >=") {
    SoftMask soft(Extent{3, 1}, std::vector<double>{0.49, 0.5, 0.51});
    const auto m = binarize(soft, 0.5);
    CHECK_FALSE(m.get(0, 0));
    CHECK(m.get(1, 0));
    CHECK(m.get(2, 0));
    CHECK(binarize(SoftMask(Extent{4, 4}, 0.0), 0.5).none());
    CHECK(binarize(SoftMask(Extent{4, 4}, 1.0), 0.5).count() == 16);
    CHECK_THROWS_AS(binarize(soft, 0.0), Error);
    CHECK_THROWS_AS(binarize(soft, 1.0), Error);
}

TEST_CASE("soft mask rejects values outside [0,1]") {
    CHECK_THROWS_AS(SoftMask(Extent{2, 1}, std::vector<double>{0.2, 1.2}), Error);
    CHECK_THROWS_AS(SoftMask(Extent{2, 1}, std::vector<double>{0.2}), Error);
}

TEST_CASE("dilate single pixel gives a 3x3 block") {
    BinaryMask m(Extent{11, 11});
    m.set(5, 5);
    const auto d = dilate(m, 1);
    CHECK(d.count() == 9);
    for (int y = 4; y <= 6; ++y)
        for (int x = 4; x <= 6; ++x) CHECK(d.get(x, y));
}

TEST_CASE("dilate radius 0 is identity") {
    std::mt19937_64 rng(1);
    const auto m = testutil::random_mask(rng, {17, 9}, 0.3);
    CHECK(dilate(m, 0) == m);
}

TEST_CASE("dilate segment radius 2 matches enumeration") {
    BinaryMask m(Extent{12, 10});
    m.set(4, 5);
    m.set(5, 5);
    const auto d = dilate(m, 2);
    CHECK(d == brute_dilate(m, 2));
    CHECK(d.count() == 6 * 5);
}

TEST_CASE("dilate matches brute force on random masks") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        const Extent e{1 + int(rng() % 40), 1 + int(rng() % 40)};
        const auto m = testutil::random_mask(rng, e, 0.05 * double(rng() % 8));
        const int r = int(rng() % 7);
        REQUIRE(dilate(m, r) == brute_dilate(m, r));
    }
    CHECK_THROWS_AS(dilate(BinaryMask(Extent{3, 3}), -1), Error);
}

TEST_CASE("dilate properties") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        const Extent e{20, 16};
        const auto a = testutil::random_mask(rng, e, 0.05);
        const auto b = mask_union(a, testutil::random_mask(rng, e, 0.05));
        const int r1 = int(rng() % 4), r2 = int(rng() % 4);
        CHECK(dilate(a, r1).subset_of(dilate(b, r1)));
        CHECK(a.subset_of(dilate(a, r1)));
        CHECK(dilate(a, std::max(r1, r2)).subset_of(dilate(dilate(a, r1), r2)));
    }
}

TEST_CASE("set operations match per-pixel oracle") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 50; ++i) {
        const auto a = testutil::random_mask(rng, {16, 16}, 0.4);
        const auto b = testutil::random_mask(rng, {16, 16}, 0.4);
        const auto u = mask_union(a, b), n = intersect(a, b), s = subtract(a, b);
        std::int64_t inter = 0;
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) {
                REQUIRE(u.get(x, y) == (a.get(x, y) || b.get(x, y)));
                REQUIRE(n.get(x, y) == (a.get(x, y) && b.get(x, y)));
                REQUIRE(s.get(x, y) == (a.get(x, y) && !b.get(x, y)));
                inter += (a.get(x, y) && b.get(x, y)) ? 1 : 0;
            }
        CHECK(intersection_count(a, b) == inter);
        CHECK(intersects(a, b) == (inter > 0));
        CHECK(intersect(s, b).none());
    }
}

TEST_CASE("subtract identities and dimension checks") {
    std::mt19937_64 rng(5);
    const auto m = testutil::random_mask(rng, {9, 7}, 0.5);
    CHECK(subtract(m, BinaryMask(m.extent())) == m);
    CHECK(subtract(m, m).none());
    BinaryMask other(Extent{7, 9});
    try {
        mask_union(m, other);
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
    CHECK_THROWS_AS(subtract(m, other), Error);
    CHECK_THROWS_AS(intersect(m, other), Error);
    CHECK_THROWS_AS(iou(m, other), Error);
}

TEST_CASE("iou examples and properties") {
    BinaryMask a(Extent{6, 6}), b(Extent{6, 6});
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) a.set(x, y);
    for (int y = 0; y < 2; ++y)
        for (int x = 1; x < 4; ++x) b.set(x, y);
    // 2x3 rectangles overlapping in 2x2
    CHECK(iou(a, b) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(BinaryMask(Extent{3, 3}), BinaryMask(Extent{3, 3})) == 0.0);
    BinaryMask c(Extent{6, 6});
    c.set(5, 5);
    CHECK(iou(a, c) == 0.0);

    std::mt19937_64 rng(6);
    for (int i = 0; i < 100; ++i) {
        const auto p = testutil::random_mask(rng, {12, 12}, 0.3);
        const auto q = testutil::random_mask(rng, {12, 12}, 0.3);
        const double v = iou(p, q);
        CHECK(v == iou(q, p));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v == doctest::Approx(testutil::pixel_iou(p, q)));
    }
}

TEST_CASE("connected components connectivity") {
    CHECK(connected_components(BinaryMask(Extent{5, 5})).empty());
    BinaryMask m(Extent{4, 4});
    m.set(1, 1);
    m.set(2, 2);
    CHECK(connected_components(m, Connectivity::Eight).size() == 1);
    CHECK(connected_components(m, Connectivity::Four).size() == 2);
}

TEST_CASE("connected components match flood fill") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const auto m = testutil::random_mask(rng, {32, 32}, 0.1 + 0.05 * double(i % 8));
        for (int conn : {4, 8}) {
            int n = 0;
            const auto labels = testutil::flood_labels(m, conn, &n);
            const auto cc = connected_components(m, conn == 4 ? Connectivity::Four : Connectivity::Eight);
            REQUIRE(int(cc.size()) == n);
            BinaryMask all(m.extent());
            std::int64_t prev = -1;
            for (std::size_t k = 0; k < cc.size(); ++k) {
                CHECK(cc[k].min_index > prev);
                prev = cc[k].min_index;
                CHECK(cc[k].area == cc[k].mask.count());
                CHECK(cc[k].area >= 1);
                CHECK(intersect(all, cc[k].mask).none());
                all = mask_union(all, cc[k].mask);
                for (std::size_t p = 0; p < labels.size(); ++p) {
                    REQUIRE(cc[k].mask.get(p) == (labels[p] == int(k)));
                }
                int minx = 99, miny = 99, maxx = -1, maxy = -1;
                for (int y = 0; y < 32; ++y)
                    for (int x = 0; x < 32; ++x)
                        if (cc[k].mask.get(x, y)) {
                            minx = std::min(minx, x);
                            maxx = std::max(maxx, x);
                            miny = std::min(miny, y);
                            maxy = std::max(maxy, y);
                        }
                CHECK(cc[k].bbox == BoundingBox{minx, miny, maxx, maxy});
            }
            CHECK(all == m);
        }
    }
}

TEST_CASE("gaussian blur identities") {
    std::mt19937_64 rng(8);
    const auto m = testutil::random_mask(rng, {15, 11}, 0.4);
    const auto s0 = gaussian_blur(m, 0.0);
    for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 15; ++x) CHECK(s0.at(x, y) == (m.get(x, y) ? 1.0 : 0.0));
    const auto full = gaussian_blur(BinaryMask(Extent{20, 20}, true), 2.0);
    for (double v : full.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gaussian_blur(BinaryMask(Extent{20, 20}), 2.0).max() == 0.0);
    CHECK_THROWS_AS(gaussian_blur(m, -1.0), Error);
}

TEST_CASE("gaussian blur matches dense convolution") {
    BinaryMask single(Extent{15, 15});
    single.set(7, 7);
    const auto oracle = testutil::dense_blur(single, 1.0);
    const auto got = gaussian_blur(single, 1.0);
    for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(std::abs(got.values()[i] - oracle[i]) < 1e-6);

    std::mt19937_64 rng(9);
    for (int i = 0; i < 20; ++i) {
        const auto m = testutil::random_mask(rng, {1 + int(rng() % 30), 1 + int(rng() % 30)}, 0.2);
        const double sigma = 0.5 + double(rng() % 5) * 0.5;
        const auto o = testutil::dense_blur(m, sigma);
        const auto g = gaussian_blur(m, sigma);
        for (std::size_t k = 0; k < o.size(); ++k) REQUIRE(std::abs(g.values()[k] - o[k]) < 1e-6);
    }
}

TEST_CASE("rle known encoding") {
    // column-major: column 0 = {0,1}, column 1 = {1,1}
    BinaryMask m(Extent{2, 2});
    m.set(0, 1);
    m.set(1, 0);
    m.set(1, 1);
    const auto r = encode_rle(m);
    CHECK(r.height == 2);
    CHECK(r.width == 2);
    CHECK(r.counts == std::vector<std::int64_t>{1, 3});
    BinaryMask first(Extent{2, 2});
    first.set(0, 0);
    CHECK(encode_rle(first).counts == std::vector<std::int64_t>{0, 1, 3});
    CHECK(to_json(r).dump() == R"({"counts":[1,3],"size":[2,2]})");
}

TEST_CASE("rle round-trips random masks") {
    std::mt19937_64 rng(10);
    for (int i = 0; i < 300; ++i) {
        const Extent e{1 + int(rng() % 50), 1 + int(rng() % 50)};
        const auto m = testutil::random_mask(rng, e, double(rng() % 11) / 10.0);
        REQUIRE(decode_rle(encode_rle(m)) == m);
        REQUIRE(mask_from_json(nlohmann::json::parse(mask_to_json(m).dump())) == m);
    }
}

TEST_CASE("rle rejects bad counts") {
    CHECK_THROWS_AS(decode_rle(Rle{2, 2, {1, 2}}), Error);
    CHECK_THROWS_AS(decode_rle(Rle{2, 2, {1, -1, 4}}), Error);
    CHECK_THROWS_AS(rle_from_json(nlohmann::json{{"size", {2}}, {"counts", {4}}}), Error);
}

TEST_CASE("rle file round trip") {
    const auto dir = testutil::temp_dir("rle");
    std::mt19937_64 rng(11);
    const auto m = testutil::random_mask(rng, {33, 21}, 0.3);
    write_mask(dir / "m.rle.json", m);
    CHECK(read_mask(dir / "m.rle.json") == m);
    std::filesystem::remove_all(dir);
}
