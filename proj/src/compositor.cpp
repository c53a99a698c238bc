#include "cgvd/compositor.hpp"

#include "cgvd/error.hpp"
#include "cgvd/kernels.hpp"

#include <algorithm>
#include <chrono>

namespace cgvd {

namespace {
using Clock = std::chrono::steady_clock;
}

void CompositorConfig::validate() const {
    if (blur_sigma < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "blur sigma must be >= 0");
    }
}

Image composite(const Image& clean, const Image& live, const SoftMask& alpha,
                const BinaryMask* robot) {
    require_same_extent(clean.extent(), live.extent(), "clean vs live");
    require_same_extent(alpha.extent(), live.extent(), "alpha vs live");
    Image out(live.extent());
    kernels::omp::blend(clean.data(), live.data(), alpha.values(), out.data(), live.extent());
    if (robot) {
        require_same_extent(robot->extent(), live.extent(), "robot mask vs live");
        kernels::omp::overwrite(live.data(), robot->bits(), out.data(), live.extent());
    }
    return out;
}

double EpisodeReport::frame_ms_p50() const {
    if (frame_ms.empty()) {
        return 0.0;
    }
    auto sorted = frame_ms;
    std::sort(sorted.begin(), sorted.end());
    return sorted[sorted.size() / 2];
}

nlohmann::json EpisodeReport::to_json() const {
    return {{"episode_id", episode_id},
            {"frames", frames},
            {"segmentation_calls", segmentation_calls},
            {"inpaint_calls", inpaint_calls},
            {"segmentation_calls_at_init", segmentation_calls_at_init},
            {"inpaint_calls_at_init", inpaint_calls_at_init},
            {"init_ms", init_ms},
            {"frame_ms", frame_ms},
            {"frame_ms_p50", frame_ms_p50()},
            {"fail_open", fail_open},
            {"provenance", provenance.to_json()}};
}

Episode::Episode(std::string id, Segmenter& segmenter, Inpainter& inpainter, EpisodeConfig cfg)
    : id_(std::move(id)), segmenter_(segmenter), inpainter_(inpainter), cfg_(std::move(cfg)) {
    cfg_.distiller.validate();
    cfg_.compositor.validate();
}

const CleanScene& Episode::clean_scene() const {
    if (!clean_) {
        throw Error(ErrorCode::Uninitialized, "episode '" + id_ + "' not initialized");
    }
    return *clean_;
}

Image Episode::init(const Image& o0, const BinaryMask& robot_mask0,
                    const ConceptDecomposition& concepts) {
    if (clean_ || cache_.get()) {
        throw Error(ErrorCode::EpisodeAlreadyInitialized, "episode '" + id_ + "'");
    }
    const auto start = Clock::now();
    clean_ = cache_.get_or_build([&] {
        return build_clean_scene(o0, robot_mask0, concepts, segmenter_, inpainter_, cfg_.distiller);
    });
    alpha_ = gaussian_blur(clean_->gate_mask, cfg_.compositor.blur_sigma);
    // t=0 goes through the same blend + overwrite as every later frame.
    Image out = composite(clean_->image, o0, alpha_,
                          cfg_.compositor.robot_overwrite ? &robot_mask0 : nullptr);
    init_ms_ = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    seg_at_init_ = segmenter_.calls();
    inp_at_init_ = inpainter_.calls();
    last_timestep_ = 0;
    frames_ = 1;
    return out;
}

Image Episode::distill(const FrameInput& frame) {
    if (!clean_) {
        throw Error(ErrorCode::Uninitialized, "episode '" + id_ + "' not initialized");
    }
    if (frame.timestep <= last_timestep_) {
        throw Error(ErrorCode::InvalidConfig, "timestep must increase past " + std::to_string(last_timestep_));
    }
    require_same_extent(frame.observation.extent(), clean_->image.extent(), "frame vs episode");
    require_same_extent(frame.robot_mask.extent(), clean_->image.extent(), "robot mask vs episode");
    const auto start = Clock::now();
    Image out = composite(clean_->image, frame.observation, alpha_,
                          cfg_.compositor.robot_overwrite ? &frame.robot_mask : nullptr);
    frame_ms_.push_back(std::chrono::duration<double, std::milli>(Clock::now() - start).count());
    last_timestep_ = frame.timestep;
    ++frames_;
    return out;
}

EpisodeReport Episode::close() const {
    if (!clean_) {
        throw Error(ErrorCode::Uninitialized, "episode '" + id_ + "' not initialized");
    }
    EpisodeReport r;
    r.episode_id = id_;
    r.frames = frames_;
    r.segmentation_calls = segmenter_.calls();
    r.inpaint_calls = inpainter_.calls();
    r.segmentation_calls_at_init = seg_at_init_;
    r.inpaint_calls_at_init = inp_at_init_;
    r.init_ms = init_ms_;
    r.frame_ms = frame_ms_;
    r.fail_open = clean_->provenance.fail_open;
    r.provenance = clean_->provenance;
    return r;
}

} // namespace cgvd
