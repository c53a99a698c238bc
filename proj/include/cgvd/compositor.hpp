#pragma once

// Per-frame compositing of the live observation with the cached clean scene.

#include "cgvd/distiller.hpp"
#include "cgvd/image.hpp"
#include "cgvd/inpaint.hpp"
#include "cgvd/mask.hpp"
#include "cgvd/segmentation.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cgvd {

struct CompositorConfig {
    double blur_sigma = 2.0;
    bool robot_overwrite = true;

    void validate() const;
};

struct EpisodeConfig {
    DistillerConfig distiller;
    CompositorConfig compositor;
};

struct FrameInput {
    const Image& observation;
    const BinaryMask& robot_mask;
    std::int64_t timestep = 0;
};

// alpha * clean + (1 - alpha) * live, rounded half up; then, if `robot` is
// given, robot pixels copied from `live` bit-exactly.
Image composite(const Image& clean, const Image& live, const SoftMask& alpha,
                const BinaryMask* robot);

struct EpisodeReport {
    std::string episode_id;
    std::int64_t frames = 0;  // distilled frames including t=0
    std::int64_t segmentation_calls = 0;
    std::int64_t inpaint_calls = 0;
    std::int64_t segmentation_calls_at_init = 0;
    std::int64_t inpaint_calls_at_init = 0;
    double init_ms = 0.0;
    std::vector<double> frame_ms;  // t > 0 only
    bool fail_open = false;
    Provenance provenance;

    double frame_ms_p50() const;
    nlohmann::json to_json() const;
};

/// One episode's state. Owned by a single frame stream; calls are ordered.
class Episode {
  public:
    Episode(std::string id, Segmenter& segmenter, Inpainter& inpainter, EpisodeConfig cfg);

    // Runs the full t=0 pipeline and returns the distilled first frame.
    // Throws EpisodeAlreadyInitialized on a second call.
    Image init(const Image& o0, const BinaryMask& robot_mask0, const ConceptDecomposition& concepts);

    // t > 0, strictly increasing. Never touches a backend.
    Image distill(const FrameInput& frame);

    EpisodeReport close() const;

    bool initialized() const { return clean_ != nullptr; }
    const CleanScene& clean_scene() const;
    const SoftMask& alpha() const { return alpha_; }
    std::int64_t segmentation_calls() const { return segmenter_.calls(); }
    std::int64_t inpaint_calls() const { return inpainter_.calls(); }

  private:
    std::string id_;
    CountingSegmenter segmenter_;
    CountingInpainter inpainter_;
    EpisodeConfig cfg_;
    CleanSceneCache cache_;
    std::shared_ptr<const CleanScene> clean_;
    SoftMask alpha_;
    std::int64_t last_timestep_ = -1;
    std::int64_t frames_ = 0;
    double init_ms_ = 0.0;
    std::int64_t seg_at_init_ = 0;
    std::int64_t inp_at_init_ = 0;
    std::vector<double> frame_ms_;
};

} // namespace cgvd
