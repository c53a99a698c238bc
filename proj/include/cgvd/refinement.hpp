#pragma once

// Two-layer target refinement: cross-validation against distractor channels,
// then spatial disambiguation over connected components.

#include "cgvd/mask.hpp"
#include "cgvd/segmentation.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

namespace cgvd {

struct RefinementConfig {
    double eta = 0.3;  // IoU threshold, strict ">"
    Connectivity connectivity = Connectivity::Eight;

    void validate() const;
};

struct ScoredInstance {
    Instance instance;
    // sigma_safe minus the strongest conflicting sigma_dist (0 if none). Never clamped.
    double genuineness = 0.0;
    std::optional<std::size_t> best_conflict;  // index into the distractor list
};

struct ComponentScore {
    ConnectedComponent component;
    double g_star = 0.0;
    double sigma_star = 0.0;
    double score = 0.0;
    std::vector<std::size_t> contributors;  // indices into the scored list
};

struct RefinementTrace {
    std::vector<ScoredInstance> scored;
    std::vector<ComponentScore> components;
    std::size_t selected = 0;

    nlohmann::json to_json() const;
};

// Layer 1.
std::vector<ScoredInstance> cross_validate(const std::vector<Instance>& targets,
                                           const std::vector<Instance>& distractors,
                                           const RefinementConfig& cfg);

// Layer 2: scores every component of the union of scored masks and keeps the
// best under (score desc, area desc, min raster index asc).
// Throws NoTargetFound when nothing is left to score.
std::vector<ComponentScore> score_components(const std::vector<ScoredInstance>& scored,
                                             const RefinementConfig& cfg);
std::size_t best_component(const std::vector<ComponentScore>& components);
BinaryMask select_component(const std::vector<ScoredInstance>& scored, const RefinementConfig& cfg);

struct RefinedTarget {
    BinaryMask target;
    RefinementTrace trace;
};

// Refinement applies to the target concept only; distractor instances are the
// union of every distractor channel.
RefinedTarget refine_target(const std::vector<Instance>& target_instances,
                            const std::vector<Instance>& distractor_instances,
                            const RefinementConfig& cfg);

// Single-pass selection used by the no-refinement ablation: the highest
// confidence target instance, ties broken by area then raster index.
BinaryMask select_top_confidence(const std::vector<Instance>& target_instances);

} // namespace cgvd
