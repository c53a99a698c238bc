// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any fails.

#include "cgvd/distiller.hpp"
#include "cgvd/harness.hpp"
#include "cgvd/refinement.hpp"
#include "cgvd/rle.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <thread>

using namespace cgvd;
using namespace cgvd::harness;

namespace {

// Pinned tolerances.
constexpr double kScoreTol = 1e-9;
constexpr double kWorkedExampleSeconds = 1.0;
constexpr int kOracleScenes = 1000;
constexpr double kOracleSeconds = 60.0;
constexpr int kMaskTriples = 10000;
constexpr int kRobotEpisodes = 50;
constexpr int kSweepDistractors = 18;
constexpr double kFullSuccessMin = 0.95;
constexpr double kSweepSeconds = 600.0;
constexpr int kAttributeScenes = 100;
constexpr int kAttributeDistractors = 4;
constexpr double kAttributeRateMin = 0.95;
constexpr double kAttributeSeconds = 300.0;
constexpr double kLatencyRatioMin = 5.0;
constexpr double kFrameP50MaxMs = 10.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

BinaryMask rect(Extent e, int x0, int y0, int x1, int y1) {
    BinaryMask m(e);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) m.set(x, y);
    return m;
}

Outcome worked_example() {
    const auto t0 = std::chrono::steady_clock::now();
    const Extent e{40, 20};
    const auto spoon = rect(e, 2, 2, 10, 6);
    const auto spatula = rect(e, 20, 2, 30, 8);
    const auto refined = refine_target({{spoon, 0.8, "spoon"}, {spatula, 0.6, "spoon"}}, {{spatula, 0.9, "spatula"}}, {});
    const auto& tr = refined.trace;
    bool ok = tr.scored.size() == 2 && tr.components.size() == 2;
    double g = 0, imposter = 0, genuine = 0;
    if (ok) {
        g = tr.scored[1].genuineness;
        genuine = tr.components[0].score;
        imposter = tr.components[1].score;
        ok = std::abs(g + 0.3) < kScoreTol && std::abs(imposter - 0.42) < kScoreTol &&
             std::abs(genuine - 1.44) < kScoreTol && tr.selected == 0 && refined.target == spoon;
    }
    // Rendered scene through the mock backend.
    const auto scene = generate_scene(worked_example_scene());
    const auto ep = run_episode(scene, Variant::Full, PipelineOptions{});
    ok = ok && ep.metrics.success;
    const double secs = seconds_since(t0);
    ok = ok && secs < kWorkedExampleSeconds;
    return {ok, fmt("g=%.12f imposter=%.12f genuine=%.12f episode_success=%d %.3fs", g, imposter, genuine,
                    int(ep.metrics.success), secs)};
}

Outcome oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1001);
    int agree = 0;
    for (int i = 0; i < kOracleScenes; ++i) {
        const auto s = testutil::random_refinement_scene(rng);
        const auto oracle = testutil::oracle_refine(s.targets, s.distractors, 0.3);
        const auto got = refine_target(s.targets, s.distractors, {});
        bool same = got.target == oracle.selected && got.trace.components.size() == oracle.scores.size();
        for (std::size_t k = 0; same && k < oracle.scores.size(); ++k)
            same = got.trace.components[k].score == oracle.scores[k];
        agree += same ? 1 : 0;
    }
    const double secs = seconds_since(t0);
    return {agree == kOracleScenes && secs < kOracleSeconds,
            fmt("%d/%d scenes agree %.2fs", agree, kOracleScenes, secs)};
}

Outcome target_protection() {
    std::mt19937_64 rng(1002);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int violations = 0, order_violations = 0;
    for (int i = 0; i < kMaskTriples; ++i) {
        const Extent e{1 + int(rng() % 40), 1 + int(rng() % 40)};
        const int rd = int(rng() % 6), rs = rd + int(rng() % 5);
        const double th = 0.05 + 0.9 * u(rng);
        GatingConfig cfg{rd, rs, int(rng() % 6), th};
        const auto n = std::size_t(e.area());
        std::vector<double> dv(n), sv(n);
        for (auto& v : dv) v = u(rng) < 0.7 ? 0.0 : u(rng);
        for (auto& v : sv) v = u(rng) < 0.9 ? 0.0 : u(rng);
        const SoftMask dist(e, dv), safe(e, sv);
        BinaryMask db(e), sb(e);
        for (int y = 0; y < e.height; ++y)
            for (int x = 0; x < e.width; ++x) {
                if (dist.at(x, y) >= th) db.set(x, y);
                if (safe.at(x, y) >= th) sb.set(x, y);
            }
        const auto gate = compose_gate(dist, safe, cfg);
        const auto robot = testutil::random_mask(rng, e, 0.02);
        const auto protected_zone = testutil::brute_dilate(sb, rs);
        if (intersect(gate, protected_zone).any()) ++violations;
        if (intersect(compose_inpaint_mask(gate, robot, cfg), subtract(protected_zone, testutil::brute_dilate(robot, cfg.r_e))).any())
            ++violations;
        // threshold first, then dilate
        if (gate != subtract(testutil::brute_dilate(db, rd), protected_zone)) ++order_violations;
    }
    return {violations == 0 && order_violations == 0,
            fmt("%d triples, %d protection violations, %d ordering violations", kMaskTriples, violations,
                order_violations)};
}

Outcome robot_exactness() {
    int episodes = 0, crossing_episodes = 0;
    std::int64_t differing = 0, crossing_pixels = 0;
    PipelineOptions opts;
    for (std::uint64_t seed = 0; episodes < kRobotEpisodes && seed < 500; ++seed) {
        ScenarioConfig sc;
        sc.distractors = 6 + int(seed % 13);
        sc.seed = 5000 + seed;
        const auto scene = generate_scene(make_scenario(sc));
        const auto r = run_episode(scene, Variant::Full, opts);
        std::int64_t crossed = 0;
        for (std::size_t t = 0; t < scene.frames.size(); ++t)
            crossed += intersect(scene.robot_masks[t], r.inpaint_mask).count();
        if (crossed == 0) continue;
        ++crossing_episodes;
        crossing_pixels += crossed;
        for (std::size_t t = 0; t < scene.frames.size(); ++t) {
            const auto& robot = scene.robot_masks[t];
            for (int y = 0; y < robot.height(); ++y)
                for (int x = 0; x < robot.width(); ++x)
                    if (robot.get(x, y) && r.outputs[t].at(x, y) != scene.frames[t].at(x, y)) ++differing;
        }
        ++episodes;
    }
    return {episodes == kRobotEpisodes && differing == 0,
            fmt("%d crossing episodes, %lld robot pixels inside inpainted regions, %lld differing", crossing_episodes,
                (long long)crossing_pixels, (long long)differing)};
}

Outcome quiescence() {
    int bad = 0, n = 0;
    for (int kind = 0; kind < 3; ++kind) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            ScenarioConfig sc;
            sc.taxonomy = DistractorKind(kind);
            sc.distractors = int(seed % 3) * 6;
            sc.seed = 7000 + seed;
            const auto scene = generate_scene(make_scenario(sc));
            for (Variant v : {Variant::Full, Variant::NoRefinement, Variant::MeanColorFill, Variant::NoRobotProtection}) {
                const auto& rep = run_episode(scene, v, PipelineOptions{}).report;
                ++n;
                if (rep.segmentation_calls != rep.segmentation_calls_at_init || rep.inpaint_calls != 1 ||
                    rep.inpaint_calls_at_init != 1 || rep.segmentation_calls == 0)
                    ++bad;
            }
        }
    }
    return {bad == 0, fmt("%d episodes, %d with calls after init or inpaint count != 1", n, bad)};
}

Outcome ablation_ordering() {
    const auto t0 = std::chrono::steady_clock::now();
    SweepSpec spec;
    spec.counts = {kSweepDistractors};
    spec.episodes_per_seed = 20;  // 10 seeds x 20 = 200 episodes
    spec.jobs = int(std::max(1u, std::thread::hardware_concurrency()));
    const auto report = run_sweep(spec, PipelineOptions{});
    const auto violations = check_variant_ordering(report);
    std::string succ;
    for (Variant v : all_variants()) succ += fmt(" %s=%.3f", to_string(v).c_str(), report.success(v, kSweepDistractors));
    const double full = report.success(Variant::Full, kSweepDistractors);
    const double base = report.success(Variant::BaselineIdentity, kSweepDistractors);
    const double secs = seconds_since(t0);
    std::string why;
    for (const auto& v : violations) why += " violated: " + v;
    return {violations.empty() && full >= kFullSuccessMin && base == 0.0 && secs < kSweepSeconds &&
                report.episodes == 200,
            fmt("%lld episodes%s %.1fs%s", (long long)report.episodes, succ.c_str(), secs, why.c_str())};
}

Outcome attribute_gating() {
    const auto t0 = std::chrono::steady_clock::now();
    int ok = 0;
    for (int i = 0; i < kAttributeScenes; ++i) {
        ScenarioConfig sc;
        sc.taxonomy = DistractorKind::Attribute;
        sc.distractors = kAttributeDistractors;
        sc.seed = 9000 + std::uint64_t(i);
        const auto scene = generate_scene(make_scenario(sc));
        const auto r = run_episode(scene, Variant::Full, PipelineOptions{});
        bool gated = true;
        for (auto k : scene.indices_with_role("distractor")) gated = gated && scene.visible[0][k].subset_of(r.gate_mask);
        if (gated && r.metrics.target_preservation_iou >= 0.9) ++ok;
    }
    const double rate = double(ok) / kAttributeScenes;
    const double secs = seconds_since(t0);
    return {rate >= kAttributeRateMin && secs < kAttributeSeconds,
            fmt("%d/%d scenes gated with target kept %.1fs", ok, kAttributeScenes, secs)};
}

std::string cpu_model() {
    std::ifstream in("/proc/cpuinfo");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("model name", 0) == 0) return line.substr(line.find(':') + 2);
    }
    return "unknown cpu";
}

Outcome latency() {
    ScenarioConfig sc;
    sc.distractors = 18;
    sc.frames = 50;
    sc.seed = 11;
    const auto scene = generate_scene(make_scenario(sc));
    const auto lat = run_latency_bench(scene, PipelineOptions{}, 1);
    const bool quiet = lat.segmentation_calls_total == lat.segmentation_calls_init &&
                       lat.inpaint_calls_total == lat.inpaint_calls_init;
    return {lat.ratio() >= kLatencyRatioMin && lat.frame_p50_ms < kFrameP50MaxMs && quiet,
            fmt("init %.2f ms, frame p50 %.3f ms p90 %.3f ms, ratio %.1f (need >= %.0f, p50 < %.0f ms) on %s, %u threads",
                lat.init_ms, lat.frame_p50_ms, lat.frame_p90_ms, lat.ratio(), kLatencyRatioMin, kFrameP50MaxMs,
                cpu_model().c_str(), std::thread::hardware_concurrency())};
}

Outcome determinism() {
    std::mt19937_64 rng(1009);
    int rle_bad = 0;
    for (int i = 0; i < 2000; ++i) {
        const Extent e{1 + int(rng() % 50), 1 + int(rng() % 50)};
        const auto m = i % 2 ? testutil::random_mask(rng, e, double(rng() % 100) / 100.0)
                             : testutil::random_blobs(rng, e, 3);
        if (mask_from_json(nlohmann::json::parse(mask_to_json(m).dump())) != m) ++rle_bad;
        if (decode_rle(encode_rle(m)) != m) ++rle_bad;
    }
    // frame stream through disk
    ScenarioConfig sc;
    sc.distractors = 12;
    sc.seed = 3;
    sc.frames = 4;
    const auto scene = generate_scene(make_scenario(sc));
    const auto dir = testutil::temp_dir("acceptance_bundle");
    write_bundle(dir, scene);
    const auto stream = read_frame_stream(dir);
    bool stream_ok = stream.frames == scene.frames && stream.robot_masks == scene.robot_masks;
    for (std::size_t k = 0; k < scene.spec.objects.size(); ++k)
        stream_ok = stream_ok && stream.gt_t0.at(scene.spec.objects[k].id) == scene.visible[0][k];
    std::filesystem::remove_all(dir);

    SweepSpec spec;
    spec.counts = {0, 6, 18};
    spec.seeds = {0, 1};
    spec.episodes_per_seed = 2;
    spec.frames = 4;
    const auto a = run_sweep(spec, PipelineOptions{}).to_csv();
    spec.jobs = 3;
    const auto b = run_sweep(spec, PipelineOptions{}).to_csv();
    return {rle_bad == 0 && stream_ok && a == b,
            fmt("rle mismatches %d, frame stream %s, sweep csv rerun %s", rle_bad, stream_ok ? "exact" : "differs",
                a == b ? "identical" : "differs")};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"worked_example_scores", worked_example},
        {"refinement_oracle_equivalence", oracle_equivalence},
        {"architectural_target_protection", target_protection},
        {"robot_pixels_bit_identical", robot_exactness},
        {"backend_quiescence", quiescence},
        {"ablation_ordering", ablation_ordering},
        {"attribute_gating", attribute_gating},
        {"latency_structure", latency},
        {"serialization_and_sweep_determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed == 0 ? 0 : 1;
}
