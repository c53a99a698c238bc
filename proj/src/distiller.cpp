#include "cgvd/distiller.hpp"

#include "cgvd/error.hpp"
#include "cgvd/io.hpp"
#include "cgvd/rle.hpp"

#include <spdlog/spdlog.h>

#include <chrono>

namespace cgvd {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

} // namespace

void GatingConfig::validate() const {
    if (r_d < 0 || r_e < 0) {
        throw Error(ErrorCode::InvalidConfig, "dilation radii must be >= 0");
    }
    if (r_s < r_d) {
        throw Error(ErrorCode::InvalidConfig, "safe radius r_s must be >= distractor radius r_d");
    }
    if (!(binarize_threshold > 0.0 && binarize_threshold < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "binarize threshold must lie in (0,1)");
    }
}

void DistillerConfig::validate() const {
    refinement.validate();
    gating.validate();
}

BinaryMask compose_gate(const BinaryMask& m_dist, const BinaryMask& m_safe, const GatingConfig& cfg) {
    cfg.validate();
    require_same_extent(m_dist.extent(), m_safe.extent(), "compose_gate");
    return subtract(dilate(m_dist, cfg.r_d), dilate(m_safe, cfg.r_s));
}

BinaryMask compose_gate(const SoftMask& m_dist, const SoftMask& m_safe, const GatingConfig& cfg) {
    cfg.validate();
    require_same_extent(m_dist.extent(), m_safe.extent(), "compose_gate");
    return compose_gate(binarize(m_dist, cfg.binarize_threshold),
                        binarize(m_safe, cfg.binarize_threshold), cfg);
}

BinaryMask compose_inpaint_mask(const BinaryMask& m_inp, const BinaryMask& m_robot,
                                const GatingConfig& cfg) {
    cfg.validate();
    require_same_extent(m_inp.extent(), m_robot.extent(), "compose_inpaint_mask");
    return mask_union(m_inp, dilate(m_robot, cfg.r_e));
}

nlohmann::json Provenance::to_json() const {
    return {{"segmenter", segmenter},     {"inpainter", inpainter},
            {"segmentation_ms", segmentation_ms}, {"refinement_ms", refinement_ms},
            {"gating_ms", gating_ms},     {"inpaint_ms", inpaint_ms},
            {"total_ms", total_ms},       {"fail_open", fail_open},
            {"warnings", warnings}};
}

CleanScene build_clean_scene(const Image& o0, const BinaryMask& robot_mask0,
                             const ConceptDecomposition& concepts, Segmenter& segmenter,
                             Inpainter& inpainter, const DistillerConfig& cfg) {
    cfg.validate();
    require_same_extent(robot_mask0.extent(), o0.extent(), "robot mask vs observation");
    const auto start = Clock::now();
    const Extent extent = o0.extent();

    CleanScene scene;
    scene.provenance.segmenter = segmenter.name();
    scene.provenance.inpainter = inpainter.name();

    auto t = Clock::now();
    const auto channels =
        segment_set(segmenter, o0, concepts.all_concepts(), cfg.parallel_channels);
    scene.provenance.segmentation_ms = ms_since(t);

    auto channel = [&](const std::string& c) -> const std::vector<Instance>& {
        return channels.at(c);
    };

    t = Clock::now();
    std::vector<Instance> distractors;
    for (const auto& d : concepts.distractors) {
        const auto& inst = channel(d);
        distractors.insert(distractors.end(), inst.begin(), inst.end());
    }
    BinaryMask target;
    try {
        if (cfg.selection == TargetSelection::Refine) {
            auto refined = refine_target(channel(concepts.target), distractors, cfg.refinement);
            target = std::move(refined.target);
            scene.trace = std::move(refined.trace);
        } else {
            target = select_top_confidence(channel(concepts.target));
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoTargetFound || !cfg.fail_open) {
            throw;
        }
        spdlog::warn("fail-open: {}", e.what());
        scene.image = o0;
        scene.inpaint_mask = BinaryMask(extent);
        scene.gate_mask = BinaryMask(extent);
        scene.safe_mask = BinaryMask(extent);
        scene.distractor_mask = BinaryMask(extent);
        scene.robot_mask = robot_mask0;
        scene.provenance.fail_open = true;
        scene.provenance.warnings.push_back(std::string("fail-open: ") + e.what());
        scene.provenance.refinement_ms = ms_since(t);
        scene.provenance.total_ms = ms_since(start);
        return scene;
    }
    scene.provenance.refinement_ms = ms_since(t);

    t = Clock::now();
    BinaryMask safe = target;
    if (concepts.anchor) {
        safe = mask_union(safe, union_channel(channel(*concepts.anchor), extent));
    }
    BinaryMask robot = mask_union(robot_mask0, union_channel(channel(std::string(kRobotConcept)), extent));
    scene.distractor_mask = union_channel(distractors, extent);
    scene.safe_mask = safe;
    scene.robot_mask = robot;
    scene.gate_mask = compose_gate(scene.distractor_mask, safe, cfg.gating);
    scene.inpaint_mask = compose_inpaint_mask(scene.gate_mask, robot, cfg.gating);
    scene.provenance.gating_ms = ms_since(t);

    t = Clock::now();
    scene.image = inpaint(inpainter, o0, scene.inpaint_mask);
    scene.provenance.inpaint_ms = ms_since(t);
    scene.provenance.total_ms = ms_since(start);
    return scene;
}

std::shared_ptr<const CleanScene> CleanSceneCache::get_or_build(
    const std::function<CleanScene()>& build) {
    std::lock_guard lock(mutex_);
    if (!scene_) {
        scene_ = std::make_shared<const CleanScene>(build());
    }
    return scene_;
}

std::shared_ptr<const CleanScene> CleanSceneCache::get() const {
    std::lock_guard lock(mutex_);
    return scene_;
}

void write_clean_scene(const std::filesystem::path& dir, const CleanScene& scene) {
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "clean.png", encode_png(scene.image));
    write_text_atomic(dir / "m_inp.rle.json", mask_to_json(scene.gate_mask).dump() + "\n");
    write_text_atomic(dir / "m_lama.rle.json", mask_to_json(scene.inpaint_mask).dump() + "\n");
    write_text_atomic(dir / "provenance.json", scene.provenance.to_json().dump(2) + "\n");
    if (scene.trace) {
        write_text_atomic(dir / "refinement.json", scene.trace->to_json().dump(2) + "\n");
    }
}

} // namespace cgvd
