// Metrics, episode runner, sweeps and the latency bench.

#include "cgvd/harness.hpp"

#include "cgvd/codec.hpp"
#include "cgvd/error.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <memory>
#include <set>

namespace cgvd::harness {

std::string to_string(Variant v) {
    switch (v) {
    case Variant::Full: return "full";
    case Variant::NoRefinement: return "no_refinement";
    case Variant::MeanColorFill: return "mean_color_fill";
    case Variant::NoRobotProtection: return "no_robot_protection";
    case Variant::BaselineIdentity: return "baseline_identity";
    }
    return "full";
}

Variant variant_from(const std::string& s) {
    for (Variant v : all_variants()) {
        if (to_string(v) == s) return v;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown variant '" + s + "'");
}

const std::vector<Variant>& all_variants() {
    static const std::vector<Variant> v{Variant::Full, Variant::NoRefinement, Variant::MeanColorFill,
                                        Variant::NoRobotProtection, Variant::BaselineIdentity};
    return v;
}

nlohmann::json DistillationMetrics::to_json() const {
    return {{"target_preservation_iou", target_preservation_iou},
            {"distractor_residual_ratio", distractor_residual_ratio},
            {"anchor_preservation_iou", anchor_preservation_iou},
            {"robot_exactness", robot_exactness},
            {"success", success}};
}

namespace {

int channel_distance(Rgb a, Rgb b) {
    return std::max({std::abs(int(a.r) - b.r), std::abs(int(a.g) - b.g), std::abs(int(a.b) - b.b)});
}

bool judge(const DistillationMetrics& m, const MetricThresholds& th) {
    return m.target_preservation_iou >= th.target_iou && m.distractor_residual_ratio <= th.residual &&
           m.anchor_preservation_iou >= th.anchor_iou && m.robot_exactness;
}

// Share of visible pixels of the given objects that the output left intact.
double preservation(const GeneratedScene& scene, std::size_t t, const std::vector<std::size_t>& objs,
                    const Image& out, int tol) {
    const Image& live = scene.frames[t];
    std::int64_t total = 0, kept = 0;
    for (std::size_t k : objs) {
        const auto& vis = scene.visible[t][k];
        const Extent e = vis.extent();
        for (std::int64_t i = 0; i < e.area(); ++i) {
            if (!vis.get(i)) continue;
            const int x = int(i % e.width), y = int(i / e.width);
            ++total;
            if (channel_distance(out.at(x, y), live.at(x, y)) <= tol) ++kept;
        }
    }
    return total == 0 ? 1.0 : double(kept) / double(total);
}

} // namespace

DistillationMetrics frame_metrics(const GeneratedScene& scene, std::size_t t, const Image& distilled,
                                  const MetricThresholds& th) {
    if (t >= scene.frames.size()) {
        throw Error(ErrorCode::InvalidConfig, "frame index out of range");
    }
    const Image& live = scene.frames[t];
    require_same_extent(distilled.extent(), live.extent(), "distilled vs live frame");
    DistillationMetrics m;
    m.target_preservation_iou =
        preservation(scene, t, scene.indices_with_role("target"), distilled, th.preserve_tolerance);
    m.anchor_preservation_iou =
        preservation(scene, t, scene.indices_with_role("anchor"), distilled, th.preserve_tolerance);

    std::int64_t distinct = 0, surviving = 0;
    for (std::size_t k : scene.indices_with_role("distractor")) {
        const auto& vis = scene.visible[t][k];
        const Extent e = vis.extent();
        for (std::int64_t i = 0; i < e.area(); ++i) {
            if (!vis.get(i)) continue;
            const int x = int(i % e.width), y = int(i / e.width);
            const Rgb bg = scene.background.at(x, y);
            if (channel_distance(live.at(x, y), bg) <= th.removal_tolerance) continue;
            ++distinct;
            if (channel_distance(distilled.at(x, y), bg) > th.removal_tolerance) ++surviving;
        }
    }
    m.distractor_residual_ratio = distinct == 0 ? 0.0 : double(surviving) / double(distinct);

    const auto& robot = scene.robot_masks[t];
    const Extent e = robot.extent();
    for (std::int64_t i = 0; i < e.area() && m.robot_exactness; ++i) {
        if (robot.get(i)) {
            const int x = int(i % e.width), y = int(i / e.width);
            m.robot_exactness = distilled.at(x, y) == live.at(x, y);
        }
    }
    m.success = judge(m, th);
    return m;
}

DistillationMetrics combine(const std::vector<DistillationMetrics>& frames, const MetricThresholds& th) {
    DistillationMetrics m;
    for (const auto& f : frames) {
        m.target_preservation_iou = std::min(m.target_preservation_iou, f.target_preservation_iou);
        m.anchor_preservation_iou = std::min(m.anchor_preservation_iou, f.anchor_preservation_iou);
        m.distractor_residual_ratio = std::max(m.distractor_residual_ratio, f.distractor_residual_ratio);
        m.robot_exactness = m.robot_exactness && f.robot_exactness;
    }
    m.success = judge(m, th);
    return m;
}

EpisodeConfig variant_config(Variant v, EpisodeConfig base) {
    switch (v) {
    case Variant::NoRefinement:
        base.distiller.selection = TargetSelection::TopConfidence;
        break;
    case Variant::NoRobotProtection:
        base.compositor.robot_overwrite = false;
        break;
    default:
        break;
    }
    return base;
}

EpisodeResult run_episode(const GeneratedScene& scene, Variant variant, const PipelineOptions& opts) {
    EpisodeResult result;
    result.scene_hash = scene.hash();
    const std::string id = "seed" + std::to_string(scene.spec.seed) + "-" + to_string(variant);
    std::vector<DistillationMetrics> per_frame;

    if (variant == Variant::BaselineIdentity) {
        result.outputs = scene.frames;
        for (std::size_t t = 0; t < scene.frames.size(); ++t) {
            per_frame.push_back(frame_metrics(scene, t, scene.frames[t], opts.thresholds));
        }
        result.report.episode_id = id;
        result.report.frames = std::int64_t(scene.frames.size());
        result.gate_mask = BinaryMask(scene.spec.canvas);
        result.inpaint_mask = BinaryMask(scene.spec.canvas);
        result.metrics = combine(per_frame, opts.thresholds);
        return result;
    }

    MockSegmenter segmenter(scene.mock_scene());
    std::unique_ptr<Inpainter> inpainter;
    if (variant == Variant::MeanColorFill || opts.inpainter == InpainterKind::Mean) {
        inpainter = std::make_unique<MeanColorInpainter>();
    } else {
        inpainter = std::make_unique<DiffusionInpainter>(opts.diffusion);
    }
    Episode episode(id, segmenter, *inpainter, variant_config(variant, opts.episode));
    const auto concepts =
        decompose(scene.spec.instruction, opts.lexicon, opts.domain.value_or(scene.spec.domain));

    result.outputs.push_back(episode.init(scene.frames[0], scene.robot_masks[0], concepts));
    for (std::size_t t = 1; t < scene.frames.size(); ++t) {
        result.outputs.push_back(
            episode.distill({scene.frames[t], scene.robot_masks[t], std::int64_t(t)}));
    }
    for (std::size_t t = 0; t < scene.frames.size(); ++t) {
        per_frame.push_back(frame_metrics(scene, t, result.outputs[t], opts.thresholds));
    }
    result.report = episode.close();
    result.gate_mask = episode.clean_scene().gate_mask;
    result.inpaint_mask = episode.clean_scene().inpaint_mask;
    result.metrics = combine(per_frame, opts.thresholds);
    return result;
}

// --- sweeps -----------------------------------------------------------------

void SweepSpec::validate() const {
    if (counts.empty() || seeds.empty() || variants.empty()) {
        throw Error(ErrorCode::InvalidConfig, "sweep needs at least one count, seed and variant");
    }
    if (episodes_per_seed < 1 || frames < 1 || jobs < 1) {
        throw Error(ErrorCode::InvalidConfig, "episodes_per_seed, frames and jobs must be positive");
    }
    for (int c : counts) {
        if (c < 0) throw Error(ErrorCode::InvalidConfig, "distractor counts must be non-negative");
    }
    if (std::set<Variant>(variants.begin(), variants.end()).size() != variants.size()) {
        throw Error(ErrorCode::InvalidConfig, "duplicate variant in sweep");
    }
}

nlohmann::json SweepSpec::to_json() const {
    std::vector<std::string> names;
    for (Variant v : variants) names.push_back(to_string(v));
    return {{"taxonomy", to_string(taxonomy)},
            {"counts", counts},
            {"seeds", seeds},
            {"episodes_per_seed", episodes_per_seed},
            {"variants", names},
            {"frames", frames},
            {"jobs", jobs},
            {"timing", timing}};
}

SweepSpec SweepSpec::from_json(const nlohmann::json& j) {
    try {
        SweepSpec s;
        if (j.contains("taxonomy")) s.taxonomy = distractor_kind_from(j.at("taxonomy").get<std::string>());
        if (j.contains("counts")) s.counts = j.at("counts").get<std::vector<int>>();
        if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("episodes_per_seed")) s.episodes_per_seed = j.at("episodes_per_seed").get<int>();
        if (j.contains("variants")) {
            s.variants.clear();
            for (const auto& n : j.at("variants")) s.variants.push_back(variant_from(n.get<std::string>()));
        }
        if (j.contains("frames")) s.frames = j.at("frames").get<int>();
        if (j.contains("jobs")) s.jobs = j.at("jobs").get<int>();
        if (j.contains("timing")) s.timing = j.at("timing").get<bool>();
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("sweep spec: ") + e.what());
    }
}

double SweepReport::success(Variant v, int count) const {
    double sum = 0;
    int n = 0;
    for (const auto& r : rows) {
        if (r.variant == v && r.count == count) {
            sum += r.success;
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / n;
}

namespace {

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : std::string(); }

} // namespace

std::string SweepReport::to_csv() const {
    std::string out = "variant,taxonomy,count,seed,success,target_iou,residual,init_ms,frame_ms_p50\n";
    for (const auto& r : rows) {
        out += to_string(r.variant) + "," + to_string(r.taxonomy) + "," + std::to_string(r.count) + "," +
               std::to_string(r.seed) + "," + fixed(r.success) + "," + fixed(r.target_iou) + "," +
               fixed(r.residual) + "," + fixed(r.init_ms) + "," + fixed(r.frame_ms_p50) + "\n";
    }
    return out;
}

nlohmann::json SweepReport::aggregate() const {
    nlohmann::json table = nlohmann::json::array();
    for (Variant v : spec.variants) {
        for (int c : spec.counts) {
            std::vector<double> s, tiou, res;
            for (const auto& r : rows) {
                if (r.variant != v || r.count != c) continue;
                s.push_back(r.success);
                tiou.push_back(r.target_iou);
                res.push_back(r.residual);
            }
            auto mean = [](const std::vector<double>& x) {
                double a = 0;
                for (double d : x) a += d;
                return x.empty() ? 0.0 : a / double(x.size());
            };
            const double m = mean(s);
            double var = 0;
            for (double d : s) var += (d - m) * (d - m);
            const double sd = s.size() > 1 ? std::sqrt(var / double(s.size() - 1)) : 0.0;
            table.push_back({{"variant", to_string(v)},
                             {"count", c},
                             {"success_mean", m},
                             {"success_std_over_seeds", sd},
                             {"target_iou_mean", mean(tiou)},
                             {"residual_mean", mean(res)},
                             {"seeds", s.size()}});
        }
    }
    const auto violations = check_variant_ordering(*this);
    return {{"spec", spec.to_json()},
            {"episodes", episodes},
            {"table", table},
            {"ordering_holds", violations.empty()},
            {"ordering_violations", violations}};
}

SweepReport run_sweep(const SweepSpec& spec, const PipelineOptions& opts) {
    spec.validate();
    struct Task {
        int count;
        std::uint64_t seed;
        int episode;
    };
    std::vector<Task> tasks;
    for (int c : spec.counts) {
        for (auto s : spec.seeds) {
            for (int e = 0; e < spec.episodes_per_seed; ++e) tasks.push_back({c, s, e});
        }
    }
    const std::size_t nv = spec.variants.size();
    struct Outcome {
        DistillationMetrics metrics;
        double init_ms = 0;
        double frame_p50 = 0;
        std::string hash;
    };
    std::vector<Outcome> outcomes(tasks.size() * nv);
    std::vector<std::exception_ptr> errors(tasks.size());

#pragma omp parallel for schedule(dynamic) num_threads(spec.jobs)
    for (std::int64_t i = 0; i < std::int64_t(tasks.size()); ++i) {
        try {
            const Task& task = tasks[std::size_t(i)];
            ScenarioConfig sc;
            sc.taxonomy = spec.taxonomy;
            sc.distractors = task.count;
            sc.frames = spec.frames;
            sc.seed = fnv1a(std::to_string(task.count) + "/" + std::to_string(task.seed) + "/" +
                            std::to_string(task.episode));
            const GeneratedScene scene = generate_scene(make_scenario(sc));
            for (std::size_t v = 0; v < nv; ++v) {
                const auto r = run_episode(scene, spec.variants[v], opts);
                outcomes[std::size_t(i) * nv + v] = {r.metrics, r.report.init_ms, r.report.frame_ms_p50(),
                                                     r.scene_hash};
            }
        } catch (...) {
            errors[std::size_t(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    SweepReport report;
    report.spec = spec;
    report.episodes = std::int64_t(tasks.size());
    for (std::size_t v = 0; v < nv; ++v) {
        auto& hashes = report.scene_hashes[spec.variants[v]];
        for (std::size_t i = 0; i < tasks.size(); ++i) hashes.push_back(outcomes[i * nv + v].hash);
    }
    // Tasks are grouped (count, seed) with episodes contiguous.
    const std::size_t per = std::size_t(spec.episodes_per_seed);
    for (std::size_t v = 0; v < nv; ++v) {
        for (std::size_t g = 0; g < tasks.size(); g += per) {
            SweepRow row;
            row.variant = spec.variants[v];
            row.taxonomy = spec.taxonomy;
            row.count = tasks[g].count;
            row.seed = tasks[g].seed;
            double init = 0, p50 = 0;
            for (std::size_t k = g; k < g + per; ++k) {
                const auto& o = outcomes[k * nv + v];
                row.success += o.metrics.success ? 1.0 : 0.0;
                row.target_iou += o.metrics.target_preservation_iou;
                row.residual += o.metrics.distractor_residual_ratio;
                init += o.init_ms;
                p50 += o.frame_p50;
            }
            row.success /= double(per);
            row.target_iou /= double(per);
            row.residual /= double(per);
            if (spec.timing) {
                row.init_ms = init / double(per);
                row.frame_ms_p50 = p50 / double(per);
            }
            report.rows.push_back(row);
        }
    }
    return report;
}

std::vector<std::string> check_variant_ordering(const SweepReport& report) {
    const auto& vs = report.spec.variants;
    auto has = [&](Variant v) { return std::find(vs.begin(), vs.end(), v) != vs.end(); };
    std::vector<std::pair<Variant, Variant>> relations;  // first >= second
    auto add = [&](Variant a, Variant b) {
        if (has(a) && has(b)) relations.emplace_back(a, b);
    };
    add(Variant::Full, Variant::NoRefinement);
    add(Variant::NoRefinement, Variant::MeanColorFill);
    add(Variant::Full, Variant::NoRobotProtection);
    for (Variant v : vs) {
        if (v != Variant::BaselineIdentity) add(v, Variant::BaselineIdentity);
    }
    std::vector<std::string> violations;
    for (int c : report.spec.counts) {
        for (const auto& [a, b] : relations) {
            const double sa = report.success(a, c), sb = report.success(b, c);
            if (sa < sb) {
                violations.push_back(to_string(a) + " (" + fixed(sa) + ") < " + to_string(b) + " (" +
                                     fixed(sb) + ") at count " + std::to_string(c));
            }
        }
    }
    return violations;
}

// --- latency ----------------------------------------------------------------

nlohmann::json LatencyResult::to_json() const {
    return {{"init_ms", init_ms},
            {"frame_ms", frame_ms},
            {"frame_p50_ms", frame_p50_ms},
            {"frame_p90_ms", frame_p90_ms},
            {"init_over_frame_p50", ratio()},
            {"segmentation_ms", segmentation_ms},
            {"inpaint_ms", inpaint_ms},
            {"segmentation_calls_init", segmentation_calls_init},
            {"segmentation_calls_total", segmentation_calls_total},
            {"inpaint_calls_init", inpaint_calls_init},
            {"inpaint_calls_total", inpaint_calls_total}};
}

LatencyResult run_latency_bench(const GeneratedScene& scene, const PipelineOptions& opts, int warmup) {
    for (int i = 0; i < warmup; ++i) {
        run_episode(scene, Variant::Full, opts);
    }
    const auto r = run_episode(scene, Variant::Full, opts);
    LatencyResult out;
    out.init_ms = r.report.init_ms;
    out.frame_ms = r.report.frame_ms;
    auto pct = [](std::vector<double> v, double q) {
        if (v.empty()) return 0.0;
        std::sort(v.begin(), v.end());
        const auto idx = std::size_t(std::ceil(q * double(v.size()))) - 1;
        return v[std::min(idx, v.size() - 1)];
    };
    out.frame_p50_ms = r.report.frame_ms_p50();
    out.frame_p90_ms = pct(r.report.frame_ms, 0.9);
    out.segmentation_ms = r.report.provenance.segmentation_ms;
    out.inpaint_ms = r.report.provenance.inpaint_ms;
    out.segmentation_calls_init = r.report.segmentation_calls_at_init;
    out.segmentation_calls_total = r.report.segmentation_calls;
    out.inpaint_calls_init = r.report.inpaint_calls_at_init;
    out.inpaint_calls_total = r.report.inpaint_calls;
    return out;
}

} // namespace cgvd::harness
