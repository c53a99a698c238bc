#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cgvd/compositor.hpp"
#include "cgvd/error.hpp"
#include "cgvd/harness.hpp"
#include "support.hpp"

using namespace cgvd;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::IoError;
}

harness::GeneratedScene semantic_scene(int distractors, std::uint64_t seed) {
    harness::ScenarioConfig sc;
    sc.distractors = distractors;
    sc.seed = seed;
    return harness::generate_scene(harness::make_scenario(sc));
}

} // namespace

TEST_CASE("blend identities") {
    std::mt19937_64 rng(71);
    const Extent e{23, 17};
    const auto clean = testutil::random_image(rng, e);
    const auto live = testutil::random_image(rng, e);
    CHECK(composite(clean, live, SoftMask(e, 0.0), nullptr) == live);
    CHECK(composite(clean, live, SoftMask(e, 1.0), nullptr) == clean);
    const BinaryMask empty(e);
    CHECK(composite(clean, live, SoftMask(e, 1.0), &empty) == clean);
    CHECK_THROWS_AS(composite(clean, Image(Extent{2, 2}), SoftMask(e, 0.0), nullptr), Error);
}

TEST_CASE("robot overwrite partitions the frame") {
    std::mt19937_64 rng(72);
    const Extent e{40, 30};
    const auto clean = testutil::random_image(rng, e);
    const auto live = testutil::random_image(rng, e);
    const auto robot = testutil::random_blobs(rng, e, 3);
    const auto out = composite(clean, live, SoftMask(e, 1.0), &robot);
    for (int y = 0; y < e.height; ++y)
        for (int x = 0; x < e.width; ++x) REQUIRE(out.at(x, y) == (robot.get(x, y) ? live.at(x, y) : clean.at(x, y)));
}

TEST_CASE("blend stays within the clean/live pair") {
    std::mt19937_64 rng(73);
    for (int i = 0; i < 20; ++i) {
        const Extent e{1 + int(rng() % 30), 1 + int(rng() % 30)};
        const auto clean = testutil::random_image(rng, e);
        const auto live = testutil::random_image(rng, e);
        std::vector<double> a(std::size_t(e.area()));
        for (auto& v : a) v = double(rng() % 1001) / 1000.0;
        const auto out = composite(clean, live, SoftMask(e, a), nullptr);
        for (std::size_t k = 0; k < out.data().size(); ++k) {
            const int lo = std::min(clean.data()[k], live.data()[k]);
            const int hi = std::max(clean.data()[k], live.data()[k]);
            REQUIRE(int(out.data()[k]) >= lo);
            REQUIRE(int(out.data()[k]) <= hi);
        }
    }
}

TEST_CASE("episode lifecycle errors") {
    const auto scene = semantic_scene(2, 1);
    MockSegmenter seg(scene.mock_scene());
    MeanColorInpainter inp;
    Episode ep("e", seg, inp, {});
    CHECK(code_of([&] { ep.distill({scene.frames[1], scene.robot_masks[1], 1}); }) == ErrorCode::Uninitialized);
    const auto concepts = decompose(scene.spec.instruction, harness::default_lexicon(), scene.spec.domain);
    ep.init(scene.frames[0], scene.robot_masks[0], concepts);
    CHECK(code_of([&] { ep.init(scene.frames[0], scene.robot_masks[0], concepts); }) ==
          ErrorCode::EpisodeAlreadyInitialized);
    CHECK(code_of([&] { ep.distill({scene.frames[1], scene.robot_masks[1], 0}); }) == ErrorCode::InvalidConfig);
    const Image small(Extent{8, 8});
    const BinaryMask small_mask(Extent{8, 8});
    CHECK(code_of([&] { ep.distill({small, small_mask, 1}); }) == ErrorCode::DimensionMismatch);
    ep.distill({scene.frames[2], scene.robot_masks[2], 2});
    CHECK(code_of([&] { ep.distill({scene.frames[1], scene.robot_masks[1], 1}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("backend quiescence after init") {
    const auto scene = semantic_scene(6, 2);
    MockSegmenter seg(scene.mock_scene());
    DiffusionInpainter inp;
    Episode ep("q", seg, inp, {});
    const auto concepts = decompose(scene.spec.instruction, harness::default_lexicon(), scene.spec.domain);
    ep.init(scene.frames[0], scene.robot_masks[0], concepts);
    const auto expected = std::int64_t(concepts.safe_set().size() + concepts.distractors.size());
    CHECK(ep.segmentation_calls() == expected);
    CHECK(ep.inpaint_calls() == 1);
    for (std::size_t t = 1; t < scene.frames.size(); ++t) {
        ep.distill({scene.frames[t], scene.robot_masks[t], std::int64_t(t)});
        CHECK(ep.segmentation_calls() == expected);
        CHECK(ep.inpaint_calls() == 1);
    }
    const auto report = ep.close();
    CHECK(report.segmentation_calls == report.segmentation_calls_at_init);
    CHECK(report.inpaint_calls == 1);
    CHECK(report.frames == std::int64_t(scene.frames.size()));
    CHECK(report.frame_ms.size() == scene.frames.size() - 1);
    const auto j = report.to_json();
    CHECK(j.at("inpaint_calls") == 1);
}

TEST_CASE("report with no later frames has no frame timings") {
    const auto scene = semantic_scene(0, 3);
    MockSegmenter seg(scene.mock_scene());
    MeanColorInpainter inp;
    Episode ep("z", seg, inp, {});
    ep.init(scene.frames[0], scene.robot_masks[0],
            decompose(scene.spec.instruction, harness::default_lexicon(), scene.spec.domain));
    const auto r = ep.close();
    CHECK(r.frame_ms.empty());
    CHECK(r.frame_ms_p50() == 0.0);
    // no distractors: alpha is identically zero
    CHECK(ep.alpha().max() == 0.0);
}

TEST_CASE("robot pixels are live and the stream is deterministic") {
    const auto scene = semantic_scene(12, 4);
    const auto concepts = decompose(scene.spec.instruction, harness::default_lexicon(), scene.spec.domain);
    std::vector<std::vector<Image>> runs;
    std::int64_t crossings = 0;
    for (int run = 0; run < 2; ++run) {
        MockSegmenter seg(scene.mock_scene());
        DiffusionInpainter inp;
        Episode ep("d", seg, inp, {});
        std::vector<Image> outs{ep.init(scene.frames[0], scene.robot_masks[0], concepts)};
        for (std::size_t t = 1; t < scene.frames.size(); ++t)
            outs.push_back(ep.distill({scene.frames[t], scene.robot_masks[t], std::int64_t(t)}));
        for (std::size_t t = 0; t < outs.size(); ++t) {
            const auto& robot = scene.robot_masks[t];
            for (int y = 0; y < robot.height(); ++y)
                for (int x = 0; x < robot.width(); ++x) {
                    if (!robot.get(x, y)) continue;
                    REQUIRE(outs[t].at(x, y) == scene.frames[t].at(x, y));
                    if (run == 0 && ep.alpha().at(x, y) > 0.5) ++crossings;
                }
        }
        runs.push_back(std::move(outs));
    }
    CHECK(crossings > 0);
    CHECK(runs[0] == runs[1]);
}
