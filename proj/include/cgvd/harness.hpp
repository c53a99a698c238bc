#pragma once

// Synthetic cluttered-scene generator, episode runner, metrics, and the
// ablation/latency sweeps built on top of them.

#include "cgvd/compositor.hpp"
#include "cgvd/image.hpp"
#include "cgvd/inpaint.hpp"
#include "cgvd/instruction.hpp"
#include "cgvd/mask.hpp"
#include "cgvd/segmentation.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cgvd::harness {

enum class BackgroundKind { Solid, Gradient, Textured };
enum class ShapeKind { Rectangle, Ellipse, Utensil };
enum class DistractorKind { Semantic, Random, Attribute };
enum class Variant { Full, NoRefinement, MeanColorFill, NoRobotProtection, BaselineIdentity };

std::string to_string(DistractorKind k);
std::string to_string(Variant v);
DistractorKind distractor_kind_from(const std::string& s);
Variant variant_from(const std::string& s);
const std::vector<Variant>& all_variants();

struct ObjectSpec {
    std::string id;
    std::string role;  // target | anchor | distractor
    std::string label;
    std::string attribute;  // e.g. "green handle"; empty when none
    ShapeKind shape = ShapeKind::Rectangle;
    Rgb color;
    Rgb accent;  // utensil handle
    double cx = 0, cy = 0;
    double angle = 0;   // radians
    double length = 0;  // extent along the major axis
    double width = 0;

    // "spoon with green handle", or the bare label.
    std::string phrase() const;
};

struct RobotSpec {
    double base_x = 128;
    std::vector<std::pair<double, double>> waypoints;  // end-effector path; [0] is home
    int thickness = 7;
    Rgb color{45, 45, 55};
};

struct SceneSpec {
    std::uint64_t seed = 0;
    Extent canvas{256, 256};
    int frames = 10;
    BackgroundKind background = BackgroundKind::Textured;
    Rgb background_a{165, 135, 100};
    Rgb background_b{95, 75, 60};
    int noise_amplitude = 3;
    std::vector<ObjectSpec> objects;
    RobotSpec robot;
    ConfusionModel confusion;
    std::string instruction;
    std::string domain;
    DistractorKind taxonomy = DistractorKind::Semantic;

    nlohmann::json to_json() const;
    static SceneSpec from_json(const nlohmann::json& j);
};

struct ScenarioConfig {
    DistractorKind taxonomy = DistractorKind::Semantic;
    int distractors = 0;
    std::uint64_t seed = 0;
    Extent canvas{256, 256};
    int frames = 10;
    int cell = 42;       // placement grid pitch
    int home_band = 40;  // top rows kept free for the robot's home pose
};

// Target spoon, towel anchor, and `distractors` objects of the taxonomy,
// placed on a seeded collision-aware grid. Throws PlacementInfeasible when
// the grid has fewer cells than objects.
SceneSpec make_scenario(const ScenarioConfig& cfg);

// Spoon, spatula imposter, towel, robot, constant confidences
// (spatula answers "spoon" at 0.6 and "spatula" at 0.9, spoon answers "spoon" at 0.8).
SceneSpec worked_example_scene();

struct GeneratedScene {
    SceneSpec spec;
    Image background;                          // no objects, no robot
    std::vector<Image> frames;
    std::vector<BinaryMask> robot_masks;       // per frame
    std::vector<BinaryMask> footprints;        // per object, unoccluded
    std::vector<std::vector<BinaryMask>> visible;  // [frame][object]

    // Objects at t=0 plus the robot, for the mock backend.
    MockScene mock_scene() const;
    // SHA-256 over every frame.
    std::string hash() const;
    std::vector<std::size_t> indices_with_role(const std::string& role) const;
};

GeneratedScene generate_scene(const SceneSpec& spec);

// scene.json, frames/NNNN.png, gt/<id>_NNNN.rle.json (robot included).
void write_bundle(const std::filesystem::path& dir, const GeneratedScene& scene);

struct FrameStream {
    std::vector<Image> frames;
    std::vector<BinaryMask> robot_masks;
    std::optional<SceneSpec> spec;  // when scene.json is present
    std::map<std::string, BinaryMask> gt_t0;  // object id -> mask at t=0
};

// Accepts a bundle or a plain directory of frames/NNNN.png with robot sidecars
// in gt/robot_NNNN.rle.json or robot/NNNN.rle.json.
FrameStream read_frame_stream(const std::filesystem::path& dir);

// Mock backend inputs from a stream that carries scene.json and t=0 ground truth.
MockScene mock_scene_from(const FrameStream& stream);

DistractorLexicon default_lexicon();
std::string domain_for(DistractorKind kind);

struct MetricThresholds {
    double target_iou = 0.9;
    double residual = 0.05;
    double anchor_iou = 0.9;
    int removal_tolerance = 16;   // max channel distance to background truth
    int preserve_tolerance = 4;   // max channel distance to the live frame
};

struct DistillationMetrics {
    double target_preservation_iou = 1.0;
    double distractor_residual_ratio = 0.0;
    double anchor_preservation_iou = 1.0;
    bool robot_exactness = true;
    bool success = true;

    nlohmann::json to_json() const;
};

DistillationMetrics frame_metrics(const GeneratedScene& scene, std::size_t t, const Image& distilled,
                                  const MetricThresholds& th);
// Worst case over frames.
DistillationMetrics combine(const std::vector<DistillationMetrics>& frames, const MetricThresholds& th);

enum class InpainterKind { Diffusion, Mean };

struct PipelineOptions {
    EpisodeConfig episode;
    InpainterKind inpainter = InpainterKind::Diffusion;  // MeanColorFill overrides
    DiffusionConfig diffusion;
    MetricThresholds thresholds;
    DistractorLexicon lexicon = default_lexicon();
    std::optional<std::string> domain;  // defaults to the scene's
};

struct EpisodeResult {
    DistillationMetrics metrics;
    EpisodeReport report;
    std::string scene_hash;
    std::vector<Image> outputs;  // distilled frames
    BinaryMask gate_mask;
    BinaryMask inpaint_mask;
};

EpisodeConfig variant_config(Variant v, EpisodeConfig base);
EpisodeResult run_episode(const GeneratedScene& scene, Variant variant, const PipelineOptions& opts);

struct SweepSpec {
    DistractorKind taxonomy = DistractorKind::Semantic;
    std::vector<int> counts{0, 2, 6, 12, 18};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    int episodes_per_seed = 20;
    std::vector<Variant> variants = all_variants();
    int frames = 10;
    int jobs = 1;
    bool timing = false;

    void validate() const;
    nlohmann::json to_json() const;
    static SweepSpec from_json(const nlohmann::json& j);
};

struct SweepRow {
    Variant variant;
    DistractorKind taxonomy;
    int count = 0;
    std::uint64_t seed = 0;
    double success = 0;  // mean over episodes of this seed
    double target_iou = 0;
    double residual = 0;
    std::optional<double> init_ms;
    std::optional<double> frame_ms_p50;
};

struct SweepReport {
    SweepSpec spec;
    std::vector<SweepRow> rows;
    // variant -> scene hash per (count, seed, episode), in task order
    std::map<Variant, std::vector<std::string>> scene_hashes;
    std::int64_t episodes = 0;

    double success(Variant v, int count) const;
    std::string to_csv() const;
    nlohmann::json aggregate() const;
};

SweepReport run_sweep(const SweepSpec& spec, const PipelineOptions& opts);

// Checks the ablation ordering on every count of the report. Returns the
// violated relations, empty when the ordering holds.
std::vector<std::string> check_variant_ordering(const SweepReport& report);

struct LatencyResult {
    double init_ms = 0;
    std::vector<double> frame_ms;
    double frame_p50_ms = 0;
    double frame_p90_ms = 0;
    double segmentation_ms = 0;
    double inpaint_ms = 0;
    std::int64_t segmentation_calls_init = 0;
    std::int64_t segmentation_calls_total = 0;
    std::int64_t inpaint_calls_init = 0;
    std::int64_t inpaint_calls_total = 0;

    double ratio() const { return frame_p50_ms > 0 ? init_ms / frame_p50_ms : 0.0; }
    nlohmann::json to_json() const;
};

// Runs `warmup` untimed episodes, then one measured episode.
LatencyResult run_latency_bench(const GeneratedScene& scene, const PipelineOptions& opts, int warmup = 1);

} // namespace cgvd::harness
