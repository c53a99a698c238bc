#pragma once

// Concept-gated mask composition and per-episode clean-scene generation.

#include "cgvd/image.hpp"
#include "cgvd/inpaint.hpp"
#include "cgvd/instruction.hpp"
#include "cgvd/mask.hpp"
#include "cgvd/refinement.hpp"
#include "cgvd/segmentation.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace cgvd {

struct GatingConfig {
    int r_d = 3;  // distractor dilation
    int r_s = 6;  // safe-set dilation, >= r_d
    int r_e = 5;  // robot dilation
    double binarize_threshold = 0.5;

    void validate() const;
};

// dilate(M_dist, r_d) \ dilate(M_safe, r_s)
BinaryMask compose_gate(const BinaryMask& m_dist, const BinaryMask& m_safe, const GatingConfig& cfg);
// Soft inputs are binarized at cfg.binarize_threshold before dilation.
BinaryMask compose_gate(const SoftMask& m_dist, const SoftMask& m_safe, const GatingConfig& cfg);

// M_inp ∪ dilate(M_robot, r_e)
BinaryMask compose_inpaint_mask(const BinaryMask& m_inp, const BinaryMask& m_robot,
                                const GatingConfig& cfg);

enum class TargetSelection {
    Refine,         // cross-validation + component scoring
    TopConfidence,  // single-pass ablation
};

struct DistillerConfig {
    RefinementConfig refinement;
    GatingConfig gating;
    TargetSelection selection = TargetSelection::Refine;
    bool fail_open = true;
    bool parallel_channels = false;

    void validate() const;
};

struct Provenance {
    std::string segmenter;
    std::string inpainter;
    double segmentation_ms = 0.0;
    double refinement_ms = 0.0;
    double gating_ms = 0.0;
    double inpaint_ms = 0.0;
    double total_ms = 0.0;
    bool fail_open = false;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

struct CleanScene {
    Image image;               // o_clean
    BinaryMask inpaint_mask;   // M_lama
    BinaryMask gate_mask;      // M_inp
    BinaryMask safe_mask;      // refined target ∪ anchor
    BinaryMask distractor_mask;
    BinaryMask robot_mask;     // robot mask at t=0 before dilation
    std::optional<RefinementTrace> trace;
    Provenance provenance;
};

// Runs segment_set -> refine -> gate -> inpaint once. NoTargetFound becomes a
// pass-through scene when cfg.fail_open, otherwise it propagates.
CleanScene build_clean_scene(const Image& o0, const BinaryMask& robot_mask0,
                             const ConceptDecomposition& concepts, Segmenter& segmenter,
                             Inpainter& inpainter, const DistillerConfig& cfg);

/// Single-flight cache: the first caller builds, concurrent and later callers
/// get the same immutable scene.
class CleanSceneCache {
  public:
    std::shared_ptr<const CleanScene> get_or_build(const std::function<CleanScene()>& build);
    std::shared_ptr<const CleanScene> get() const;

  private:
    mutable std::mutex mutex_;
    std::shared_ptr<const CleanScene> scene_;
};

// clean.png, m_inp.rle.json, m_lama.rle.json, provenance.json (+ refinement.json)
void write_clean_scene(const std::filesystem::path& dir, const CleanScene& scene);

} // namespace cgvd
