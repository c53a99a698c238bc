// cgvd command-line entry point.

#include "cgvd/codec.hpp"
#include "cgvd/compositor.hpp"
#include "cgvd/distiller.hpp"
#include "cgvd/error.hpp"
#include "cgvd/harness.hpp"
#include "cgvd/image.hpp"
#include "cgvd/inpaint.hpp"
#include "cgvd/instruction.hpp"
#include "cgvd/io.hpp"
#include "cgvd/refinement.hpp"
#include "cgvd/rle.hpp"
#include "cgvd/segmentation.hpp"
#include "cgvd/wire.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <omp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace cgvd;

namespace {

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kBackend = 3, kNoTarget = 4, kCheckFailed = 5 };

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::BackendUnavailable:
    case ErrorCode::ProtocolError:
    case ErrorCode::Timeout:
        return kBackend;
    case ErrorCode::NoTargetFound:
        return kNoTarget;
    default:
        return kUsage;
    }
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Options shared by every subcommand. Layering: defaults < --config file < env < flags.
struct RunConfig {
    std::string instruction;
    std::string lexicon_path;
    std::string grammar_path;
    std::string domain;
    double eta = 0.3;
    int r_d = 3, r_s = 6, r_e = 5;
    double blur_sigma = 2.0;
    double binarize = 0.5;
    std::string seg_backend = "mock";
    std::string inpaint_backend = "diffusion";
    std::string seg_endpoint;
    std::string inpaint_endpoint;
    std::string fixture;
    int timeout_ms = 30000;
    bool fail_closed = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;
    double tau_t = 0.9, tau_d = 0.05, tau_a = 0.9;
    std::string log_level = "warn";

    EpisodeConfig episode() const {
        EpisodeConfig cfg;
        cfg.distiller.refinement.eta = eta;
        cfg.distiller.gating = {r_d, r_s, r_e, binarize};
        cfg.distiller.fail_open = !fail_closed;
        cfg.distiller.parallel_channels = jobs > 1;
        cfg.compositor.blur_sigma = blur_sigma;
        return cfg;
    }

    harness::MetricThresholds thresholds() const {
        harness::MetricThresholds th;
        th.target_iou = tau_t;
        th.residual = tau_d;
        th.anchor_iou = tau_a;
        return th;
    }

    DistractorLexicon lexicon() const {
        return lexicon_path.empty() ? harness::default_lexicon() : DistractorLexicon::load(lexicon_path);
    }

    PlacementGrammar grammar() const {
        return grammar_path.empty() ? PlacementGrammar::defaults() : PlacementGrammar::load(grammar_path);
    }

    // Re-validated after every layer is merged.
    void validate() const {
        const auto cfg = episode();
        cfg.distiller.validate();
        cfg.compositor.validate();
        if (jobs < 1) throw Error(ErrorCode::InvalidConfig, "--jobs must be >= 1");
        if (timeout_ms < 1) throw Error(ErrorCode::InvalidConfig, "--timeout-ms must be >= 1");
        for (double t : {tau_t, tau_d, tau_a}) {
            if (t < 0 || t > 1) throw Error(ErrorCode::InvalidConfig, "thresholds must lie in [0,1]");
        }
        if (seg_backend == "wire" && seg_endpoint.empty()) {
            throw Error(ErrorCode::InvalidConfig, "--seg-backend wire needs --seg-endpoint");
        }
        if (seg_backend == "fixture" && fixture.empty()) {
            throw Error(ErrorCode::InvalidConfig, "--seg-backend fixture needs --fixture");
        }
        if (inpaint_backend == "wire" && inpaint_endpoint.empty() && seg_endpoint.empty()) {
            throw Error(ErrorCode::InvalidConfig, "--inpaint-backend wire needs --inpaint-endpoint");
        }
    }

    nlohmann::json to_json() const {
        return {{"instruction", instruction}, {"domain", domain},         {"eta", eta},
                {"rd", r_d},                  {"rs", r_s},               {"re", r_e},
                {"blur_sigma", blur_sigma},   {"binarize", binarize},    {"seg_backend", seg_backend},
                {"inpaint_backend", inpaint_backend}, {"fail_closed", fail_closed},
                {"seed", seed},               {"jobs", jobs}};
    }
};

// CLI11 reads the config file before the environment, so a file value would
// shadow an env var. Re-apply env for options not given on the command line.
void env_over_config(CLI::App& app) {
    const auto& from_argv = app.parse_order();
    for (CLI::Option* opt : app.get_options()) {
        const std::string& name = opt->get_envname();
        if (name.empty() || opt->count() == 0) continue;
        const char* value = std::getenv(name.c_str());
        if (value == nullptr || std::find(from_argv.begin(), from_argv.end(), opt) != from_argv.end()) continue;
        opt->clear();
        opt->add_result(std::string(value));
        opt->run_callback();
    }
}

void add_shared_options(CLI::App& app, RunConfig& rc) {
    app.set_config("--config", "", "TOML/INI config file");
    app.add_option("--instruction", rc.instruction, "Placement instruction")->envname("CGVD_INSTRUCTION");
    app.add_option("--lexicon", rc.lexicon_path, "Distractor lexicon JSON")->envname("CGVD_LEXICON");
    app.add_option("--grammar", rc.grammar_path, "Instruction grammar JSON")->envname("CGVD_GRAMMAR");
    app.add_option("--domain", rc.domain, "Lexicon domain")->envname("CGVD_DOMAIN");
    app.add_option("--eta", rc.eta, "IoU threshold for cross-validation")->envname("CGVD_ETA");
    app.add_option("--rd", rc.r_d, "Distractor dilation radius")->envname("CGVD_RD");
    app.add_option("--rs", rc.r_s, "Safe-set dilation radius")->envname("CGVD_RS");
    app.add_option("--re", rc.r_e, "Robot dilation radius")->envname("CGVD_RE");
    app.add_option("--blur-sigma", rc.blur_sigma, "Compositing blur sigma")->envname("CGVD_BLUR_SIGMA");
    app.add_option("--binarize", rc.binarize, "Soft-mask binarization threshold")->envname("CGVD_BINARIZE");
    app.add_option("--seg-backend", rc.seg_backend, "Segmentation backend")
        ->check(CLI::IsMember({"mock", "wire", "fixture"}))
        ->envname("CGVD_SEG_BACKEND");
    app.add_option("--inpaint-backend", rc.inpaint_backend, "Inpainting backend")
        ->check(CLI::IsMember({"mean", "diffusion", "wire"}))
        ->envname("CGVD_INPAINT_BACKEND");
    app.add_option("--seg-endpoint", rc.seg_endpoint, "exec:<cmd> or tcp:<host>:<port>")
        ->envname("CGVD_SEG_ENDPOINT");
    app.add_option("--inpaint-endpoint", rc.inpaint_endpoint, "Defaults to --seg-endpoint")
        ->envname("CGVD_INPAINT_ENDPOINT");
    app.add_option("--fixture", rc.fixture, "Recorded fixture for --seg-backend fixture")
        ->envname("CGVD_FIXTURE");
    app.add_option("--timeout-ms", rc.timeout_ms, "Wire backend timeout")->envname("CGVD_TIMEOUT_MS");
    app.add_flag("--fail-closed,!--fail-open", rc.fail_closed,
                 "Exit 4 when no target is found (default: pass frames through)")
        ->envname("CGVD_FAIL_CLOSED");
    app.add_option("--seed", rc.seed, "Seed")->envname("CGVD_SEED")->each([&](const std::string&) {
        rc.seed_set = true;
    });
    app.add_option("--jobs", rc.jobs, "Worker threads")->envname("CGVD_JOBS");
    app.add_option("--tau-t", rc.tau_t, "Target preservation threshold")->envname("CGVD_TAU_T");
    app.add_option("--tau-d", rc.tau_d, "Distractor residual threshold")->envname("CGVD_TAU_D");
    app.add_option("--tau-a", rc.tau_a, "Anchor preservation threshold")->envname("CGVD_TAU_A");
    app.add_option("--log-level", rc.log_level, "trace|debug|info|warn|error|off")->envname("CGVD_LOG_LEVEL");
}

// --- backends ---------------------------------------------------------------

struct Backends {
    std::unique_ptr<Segmenter> segmenter;
    std::unique_ptr<Inpainter> inpainter;
};

Backends make_backends(const RunConfig& rc, const harness::FrameStream* stream) {
    Backends b;
    const auto timeout = std::chrono::milliseconds(rc.timeout_ms);
    std::shared_ptr<WireClient> seg_client;
    if (rc.seg_backend == "mock") {
        if (!stream) throw Error(ErrorCode::InvalidConfig, "mock backend needs a scene bundle");
        auto scene = harness::mock_scene_from(*stream);
        if (rc.seed_set) scene.seed = rc.seed;
        b.segmenter = std::make_unique<MockSegmenter>(std::move(scene));
    } else if (rc.seg_backend == "wire") {
        seg_client = std::make_shared<WireClient>(open_transport(rc.seg_endpoint, timeout), "seg");
        b.segmenter = std::make_unique<WireSegmenter>(seg_client);
    } else {
        b.segmenter = std::make_unique<FixtureSegmenter>(FixtureSegmenter::load(rc.fixture));
    }
    if (rc.inpaint_backend == "mean") {
        b.inpainter = std::make_unique<MeanColorInpainter>();
    } else if (rc.inpaint_backend == "diffusion") {
        b.inpainter = std::make_unique<DiffusionInpainter>();
    } else {
        const std::string endpoint = rc.inpaint_endpoint.empty() ? rc.seg_endpoint : rc.inpaint_endpoint;
        auto client = seg_client && endpoint == rc.seg_endpoint
                          ? seg_client
                          : std::make_shared<WireClient>(open_transport(endpoint, timeout), "inp");
        b.inpainter = std::make_unique<WireInpainter>(client);
    }
    return b;
}

std::string resolve_instruction(const RunConfig& rc, const harness::FrameStream& stream) {
    if (!rc.instruction.empty()) return rc.instruction;
    if (stream.spec) return stream.spec->instruction;
    throw UsageError("--instruction is required when the bundle has no scene.json");
}

std::string resolve_domain(const RunConfig& rc, const harness::FrameStream* stream) {
    if (!rc.domain.empty()) return rc.domain;
    if (stream && stream->spec) return stream->spec->domain;
    return "kitchen";
}

std::string frame_name(std::size_t t) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04zu", t);
    return buf;
}

// --- overlay ----------------------------------------------------------------

// 3x5 glyphs for digits, '.', '-'.
const char* glyph(char c) {
    switch (c) {
    case '0': return "111101101101111";
    case '1': return "010110010010111";
    case '2': return "111001111100111";
    case '3': return "111001111001111";
    case '4': return "101101111001001";
    case '5': return "111100111001111";
    case '6': return "111100111101111";
    case '7': return "111001001001001";
    case '8': return "111101111101111";
    case '9': return "111101111001111";
    case '.': return "000000000000010";
    case '-': return "000000111000000";
    default: return "000000000000000";
    }
}

void draw_text(Image& img, int x0, int y0, const std::string& text, Rgb color) {
    constexpr int kScale = 2;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char* g = glyph(text[i]);
        for (int gy = 0; gy < 5; ++gy) {
            for (int gx = 0; gx < 3; ++gx) {
                if (g[gy * 3 + gx] != '1') continue;
                for (int sy = 0; sy < kScale; ++sy) {
                    for (int sx = 0; sx < kScale; ++sx) {
                        const int x = x0 + int(i) * 4 * kScale + gx * kScale + sx;
                        const int y = y0 + gy * kScale + sy;
                        if (x >= 0 && y >= 0 && x < img.width() && y < img.height()) img.set(x, y, color);
                    }
                }
            }
        }
    }
}

void tint(Image& img, const BinaryMask& m, Rgb color) {
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (!m.get(x, y)) continue;
            const Rgb p = img.at(x, y);
            img.set(x, y,
                    {std::uint8_t((p.r + color.r) / 2), std::uint8_t((p.g + color.g) / 2),
                     std::uint8_t((p.b + color.b) / 2)});
        }
    }
}

Image overlay(const Image& frame, const std::vector<Instance>& distractors, const RefinementTrace& trace) {
    Image img = frame;
    for (const auto& d : distractors) tint(img, d.mask, {40, 80, 255});
    char buf[32];
    for (std::size_t k = 0; k < trace.components.size(); ++k) {
        const auto& c = trace.components[k];
        const bool chosen = k == trace.selected;
        tint(img, c.component.mask, chosen ? Rgb{0, 230, 0} : Rgb{255, 30, 30});
        std::snprintf(buf, sizeof buf, "%.2f", c.score);
        draw_text(img, c.component.bbox.min_x, std::max(0, c.component.bbox.min_y - 12), buf,
                  chosen ? Rgb{0, 255, 0} : Rgb{255, 40, 40});
    }
    return img;
}

// --- subcommands ------------------------------------------------------------

int cmd_distill(const RunConfig& rc, const std::string& in, const std::string& out) {
    const auto stream = harness::read_frame_stream(in);
    const auto concepts =
        decompose(resolve_instruction(rc, stream), rc.lexicon(), resolve_domain(rc, &stream), rc.grammar());
    auto backends = make_backends(rc, &stream);
    Episode episode(fs::path(in).filename().string(), *backends.segmenter, *backends.inpainter, rc.episode());

    fs::create_directories(fs::path(out) / "frames");
    const auto first = episode.init(stream.frames[0], stream.robot_masks[0], concepts);
    write_file_atomic(fs::path(out) / "frames" / (frame_name(0) + ".png"), encode_png(first));
    for (std::size_t t = 1; t < stream.frames.size(); ++t) {
        const auto o = episode.distill({stream.frames[t], stream.robot_masks[t], std::int64_t(t)});
        write_file_atomic(fs::path(out) / "frames" / (frame_name(t) + ".png"), encode_png(o));
    }
    write_clean_scene(fs::path(out) / "clean", episode.clean_scene());
    nlohmann::json report = episode.close().to_json();
    report["config"] = rc.to_json();
    write_text_atomic(fs::path(out) / "report.json", report.dump(2) + "\n");
    std::printf("distilled %zu frames -> %s (segmentation calls %lld, inpaint calls %lld%s)\n",
                stream.frames.size(), out.c_str(), (long long)episode.segmentation_calls(),
                (long long)episode.inpaint_calls(), episode.clean_scene().provenance.fail_open ? ", fail-open" : "");
    return kOk;
}

int cmd_explain(const RunConfig& rc, const std::string& in, const std::string& out) {
    const auto stream = harness::read_frame_stream(in);
    const auto concepts =
        decompose(resolve_instruction(rc, stream), rc.lexicon(), resolve_domain(rc, &stream), rc.grammar());
    auto backends = make_backends(rc, &stream);
    const auto channels = segment_set(*backends.segmenter, stream.frames[0], concepts.all_concepts(), false);
    std::vector<Instance> distractors;
    for (const auto& d : concepts.distractors) {
        const auto& inst = channels.at(d);
        distractors.insert(distractors.end(), inst.begin(), inst.end());
    }
    RefinementConfig cfg = rc.episode().distiller.refinement;
    nlohmann::json doc;
    doc["target"] = concepts.target;
    doc["distractors"] = concepts.distractors;
    try {
        const auto refined = refine_target(channels.at(concepts.target), distractors, cfg);
        doc["trace"] = refined.trace.to_json();
        if (!out.empty()) {
            fs::create_directories(out);
            write_file_atomic(fs::path(out) / "overlay.png",
                              encode_png(overlay(stream.frames[0], distractors, refined.trace)));
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoTargetFound || rc.fail_closed) throw;
        spdlog::warn("fail-open: {}", e.what());
        doc["trace"] = nullptr;
        doc["fail_open"] = true;
    }
    const std::string text = doc.dump(2) + "\n";
    if (!out.empty()) {
        fs::create_directories(out);
        write_text_atomic(fs::path(out) / "refinement.json", text);
    }
    std::fputs(text.c_str(), stdout);
    return kOk;
}

struct BenchArgs {
    std::string spec_path;
    std::string taxonomy = "semantic";
    std::vector<int> counts{0, 2, 6, 12, 18};
    int seeds = 10;
    int episodes = 20;
    std::vector<std::string> variants;
    int frames = 10;
    bool timing = false;
    bool check = false;
    bool latency = false;
    int latency_frames = 50;
    int latency_distractors = 18;
    std::string out = "bench_out";
};

void print_summary(const harness::SweepReport& report) {
    std::printf("%-20s", "variant \\ count");
    for (int c : report.spec.counts) std::printf("%8d", c);
    std::printf("\n");
    for (auto v : report.spec.variants) {
        std::printf("%-20s", harness::to_string(v).c_str());
        for (int c : report.spec.counts) std::printf("%8.3f", report.success(v, c));
        std::printf("\n");
    }
}

int cmd_bench(const RunConfig& rc, const BenchArgs& a, bool seeds_given) {
    harness::PipelineOptions opts;
    opts.episode = rc.episode();
    opts.episode.distiller.parallel_channels = false;  // episodes are the parallel unit
    opts.thresholds = rc.thresholds();
    opts.lexicon = rc.lexicon();
    if (!rc.domain.empty()) opts.domain = rc.domain;
    if (rc.inpaint_backend == "mean") opts.inpainter = harness::InpainterKind::Mean;
    fs::create_directories(a.out);

    if (a.latency) {
        harness::ScenarioConfig sc;
        sc.taxonomy = harness::distractor_kind_from(a.taxonomy);
        sc.distractors = a.latency_distractors;
        sc.frames = a.latency_frames;
        sc.seed = rc.seed;
        const auto scene = harness::generate_scene(harness::make_scenario(sc));
        const auto r = harness::run_latency_bench(scene, opts);
        auto doc = r.to_json();
        doc["canvas"] = {scene.spec.canvas.width, scene.spec.canvas.height};
        doc["hardware"] = {{"threads", std::thread::hardware_concurrency()},
                           {"omp_max_threads", omp_get_max_threads()}};
        write_text_atomic(fs::path(a.out) / "latency.json", doc.dump(2) + "\n");
        std::printf("init %.2f ms, frame p50 %.3f ms, p90 %.3f ms, ratio %.1f\n", r.init_ms, r.frame_p50_ms,
                    r.frame_p90_ms, r.ratio());
        return kOk;
    }

    harness::SweepSpec spec;
    if (!a.spec_path.empty()) {
        spec = harness::SweepSpec::from_json(nlohmann::json::parse(read_text(a.spec_path)));
    } else {
        spec.taxonomy = harness::distractor_kind_from(a.taxonomy);
        spec.counts = a.counts;
        spec.seeds.clear();
        const std::uint64_t base = seeds_given ? rc.seed : 0;
        for (int s = 0; s < a.seeds; ++s) spec.seeds.push_back(base + std::uint64_t(s));
        spec.episodes_per_seed = a.episodes;
        spec.frames = a.frames;
        spec.timing = a.timing;
        if (!a.variants.empty()) {
            spec.variants.clear();
            for (const auto& v : a.variants) spec.variants.push_back(harness::variant_from(v));
        }
    }
    spec.jobs = rc.jobs;
    spec.validate();
    const auto report = harness::run_sweep(spec, opts);
    write_text_atomic(fs::path(a.out) / "sweep.csv", report.to_csv());
    const auto agg = report.aggregate();
    write_text_atomic(fs::path(a.out) / "aggregate.json", agg.dump(2) + "\n");
    print_summary(report);
    if (a.check) {
        const auto violations = harness::check_variant_ordering(report);
        for (const auto& v : violations) std::printf("ordering violated: %s\n", v.c_str());
        if (!violations.empty()) return kCheckFailed;
        std::printf("ordering holds\n");
    }
    return kOk;
}

int cmd_record(const RunConfig& rc, const std::string& in, const std::string& frame_png,
               const std::vector<std::string>& concepts_arg, bool from_instruction, const std::string& out) {
    if (rc.seg_endpoint.empty()) throw UsageError("record-fixture needs --seg-endpoint");
    Image image;
    std::optional<harness::FrameStream> stream;
    if (!in.empty()) {
        stream = harness::read_frame_stream(in);
        image = stream->frames[0];
    } else if (!frame_png.empty()) {
        image = read_png(frame_png);
    } else {
        throw UsageError("record-fixture needs --in or --frame");
    }
    std::vector<std::string> concepts = concepts_arg;
    if (from_instruction) {
        const std::string text = !rc.instruction.empty() ? rc.instruction
                                 : stream && stream->spec ? stream->spec->instruction
                                                          : throw UsageError("--from-instruction needs an instruction");
        concepts = decompose(text, rc.lexicon(), resolve_domain(rc, stream ? &*stream : nullptr), rc.grammar())
                       .all_concepts();
    }
    WireClient client(open_transport(rc.seg_endpoint, std::chrono::milliseconds(rc.timeout_ms)), "rec");
    const auto entries = record_fixture(client, image, concepts);
    write_fixture(out, entries);
    std::size_t errors = 0;
    for (const auto& e : entries) errors += e.error.empty() ? 0 : 1;
    std::printf("recorded %zu exchanges (%zu errors) -> %s sha256 %s\n", entries.size(), errors, out.c_str(),
                sha256_hex(read_text(out)).c_str());
    return kOk;
}

int cmd_serve(const RunConfig& rc, const std::string& scene_dir) {
    std::unique_ptr<Segmenter> seg;
    if (!scene_dir.empty()) {
        auto scene = harness::mock_scene_from(harness::read_frame_stream(scene_dir));
        if (rc.seed_set) scene.seed = rc.seed;
        seg = std::make_unique<MockSegmenter>(std::move(scene));
    }
    std::unique_ptr<Inpainter> inp;
    if (rc.inpaint_backend == "mean") {
        inp = std::make_unique<MeanColorInpainter>();
    } else {
        inp = std::make_unique<DiffusionInpainter>();
    }
    WireServer server(seg.get(), inp.get());
    server.serve(std::cin, std::cout);
    return kOk;
}

int cmd_generate(const RunConfig& rc, const std::string& taxonomy, int distractors, int frames,
                 bool worked_example, const std::string& out) {
    harness::SceneSpec spec;
    if (worked_example) {
        spec = harness::worked_example_scene();
    } else {
        harness::ScenarioConfig sc;
        sc.taxonomy = harness::distractor_kind_from(taxonomy);
        sc.distractors = distractors;
        sc.frames = frames;
        sc.seed = rc.seed;
        spec = harness::make_scenario(sc);
    }
    const auto scene = harness::generate_scene(spec);
    harness::write_bundle(out, scene);
    std::printf("wrote %zu frames, %zu objects -> %s\n", scene.frames.size(), spec.objects.size(), out.c_str());
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Concept-gated visual distillation: distill frames, explain decisions, run benchmarks"};
    app.require_subcommand(1);
    RunConfig rc;
    add_shared_options(app, rc);

    std::string in, out;
    auto* distill = app.add_subcommand("distill", "Distill a frame bundle");
    distill->fallthrough();
    distill->add_option("--in", in, "Input bundle or frame directory")->required();
    distill->add_option("--out", out, "Output directory")->required();

    auto* explain = app.add_subcommand("explain", "Print the refinement trace for frame 0");
    explain->fallthrough();
    explain->add_option("--in", in, "Input bundle")->required();
    explain->add_option("--out", out, "Directory for refinement.json and overlay.png");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "Ablation sweep or latency bench");
    bench->fallthrough();
    bench->add_option("--spec", bench_args.spec_path, "Sweep spec JSON");
    bench->add_option("--taxonomy", bench_args.taxonomy)->check(CLI::IsMember({"semantic", "random", "attribute"}));
    bench->add_option("--counts", bench_args.counts, "Distractor counts");
    bench->add_option("--seeds", bench_args.seeds, "Number of seeds, starting at --seed");
    bench->add_option("--episodes", bench_args.episodes, "Episodes per seed");
    bench->add_option("--variants", bench_args.variants, "Subset of variants");
    bench->add_option("--frames", bench_args.frames, "Frames per episode");
    bench->add_flag("--timing", bench_args.timing, "Fill timing columns in the CSV");
    bench->add_flag("--check", bench_args.check, "Exit 5 if the variant ordering fails");
    bench->add_flag("--latency", bench_args.latency, "Run the latency bench instead of a sweep");
    bench->add_option("--latency-frames", bench_args.latency_frames);
    bench->add_option("--latency-distractors", bench_args.latency_distractors);
    bench->add_option("--out", bench_args.out, "Report directory");

    std::string frame_png, fixture_out;
    std::vector<std::string> concepts;
    bool from_instruction = false;
    auto* record = app.add_subcommand("record-fixture", "Record wire exchanges for replay");
    record->fallthrough();
    record->add_option("--in", in, "Bundle whose first frame is sent");
    record->add_option("--frame", frame_png, "Single PNG frame");
    record->add_option("--concepts", concepts, "Concepts to query");
    record->add_flag("--from-instruction", from_instruction, "Query every concept of --instruction");
    record->add_option("--out", fixture_out, "Fixture JSONL")->required();

    std::string scene_dir;
    auto* serve = app.add_subcommand("serve", "Answer wire requests on stdio with built-in backends");
    serve->fallthrough();
    serve->add_option("--scene", scene_dir, "Bundle backing mock segmentation");

    std::string taxonomy = "semantic";
    int distractors = 0, frames = 10;
    bool worked = false;
    auto* generate = app.add_subcommand("generate", "Write a synthetic scene bundle");
    generate->fallthrough();
    generate->add_option("--taxonomy", taxonomy)->check(CLI::IsMember({"semantic", "random", "attribute"}));
    generate->add_option("--distractors", distractors);
    generate->add_option("--frames", frames);
    generate->add_flag("--worked-example", worked, "Spoon, spatula imposter and towel");
    generate->add_option("--out", out)->required();

    try {
        app.parse(argc, argv);
        env_over_config(app);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        spdlog::set_default_logger(spdlog::stderr_color_mt("cgvd"));
        spdlog::set_level(spdlog::level::from_str(rc.log_level));
        rc.validate();
        omp_set_num_threads(rc.jobs);
        if (*distill) return cmd_distill(rc, in, out);
        if (*explain) return cmd_explain(rc, in, out);
        if (*bench) return cmd_bench(rc, bench_args, rc.seed_set);
        if (*record) return cmd_record(rc, in, frame_png, concepts, from_instruction, fixture_out);
        if (*serve) return cmd_serve(rc, scene_dir);
        if (*generate) return cmd_generate(rc, taxonomy, distractors, frames, worked, out);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage: %s\n", e.what());
        return kUsage;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.code());
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: bad JSON: %s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kInternal;
    }
    return kUsage;
}
