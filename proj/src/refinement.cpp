#include "cgvd/refinement.hpp"

#include "cgvd/error.hpp"

#include <algorithm>

namespace cgvd {

void RefinementConfig::validate() const {
    if (!(eta > 0.0 && eta < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "eta must lie in (0,1)");
    }
}

std::vector<ScoredInstance> cross_validate(const std::vector<Instance>& targets,
                                           const std::vector<Instance>& distractors,
                                           const RefinementConfig& cfg) {
    cfg.validate();
    std::vector<ScoredInstance> out;
    out.reserve(targets.size());
    for (const auto& s : targets) {
        ScoredInstance scored{s, s.confidence, std::nullopt};
        double worst = 0.0;
        for (std::size_t j = 0; j < distractors.size(); ++j) {
            const auto& d = distractors[j];
            if (iou(s.mask, d.mask) > cfg.eta &&
                (!scored.best_conflict || d.confidence > worst)) {
                worst = d.confidence;
                scored.best_conflict = j;
            }
        }
        scored.genuineness = s.confidence - worst;
        out.push_back(std::move(scored));
    }
    return out;
}

std::vector<ComponentScore> score_components(const std::vector<ScoredInstance>& scored,
                                             const RefinementConfig& cfg) {
    cfg.validate();
    if (scored.empty()) {
        throw Error(ErrorCode::NoTargetFound, "no target instances to score");
    }
    const Extent extent = scored.front().instance.mask.extent();
    BinaryMask all(extent);
    for (const auto& s : scored) {
        all = mask_union(all, s.instance.mask);
    }
    if (all.none()) {
        throw Error(ErrorCode::NoTargetFound, "all target masks are empty");
    }

    std::vector<ComponentScore> components;
    for (auto& cc : connected_components(all, cfg.connectivity)) {
        ComponentScore c;
        bool first = true;
        for (std::size_t i = 0; i < scored.size(); ++i) {
            if (!intersects(scored[i].instance.mask, cc.mask)) {
                continue;
            }
            c.contributors.push_back(i);
            if (first) {
                c.g_star = scored[i].genuineness;
                c.sigma_star = scored[i].instance.confidence;
                first = false;
            } else {
                c.g_star = std::max(c.g_star, scored[i].genuineness);
                c.sigma_star = std::max(c.sigma_star, scored[i].instance.confidence);
            }
        }
        c.score = (1.0 + c.g_star) * c.sigma_star;
        c.component = std::move(cc);
        components.push_back(std::move(c));
    }
    return components;
}

std::size_t best_component(const std::vector<ComponentScore>& components) {
    if (components.empty()) {
        throw Error(ErrorCode::NoTargetFound, "no components");
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < components.size(); ++k) {
        const auto& a = components[k];
        const auto& b = components[best];
        if (a.score != b.score) {
            if (a.score > b.score) best = k;
        } else if (a.component.area != b.component.area) {
            if (a.component.area > b.component.area) best = k;
        } else if (a.component.min_index < b.component.min_index) {
            best = k;
        }
    }
    return best;
}

BinaryMask select_component(const std::vector<ScoredInstance>& scored, const RefinementConfig& cfg) {
    auto components = score_components(scored, cfg);
    return components[best_component(components)].component.mask;
}

RefinedTarget refine_target(const std::vector<Instance>& target_instances,
                            const std::vector<Instance>& distractor_instances,
                            const RefinementConfig& cfg) {
    RefinedTarget out;
    out.trace.scored = cross_validate(target_instances, distractor_instances, cfg);
    out.trace.components = score_components(out.trace.scored, cfg);
    out.trace.selected = best_component(out.trace.components);
    out.target = out.trace.components[out.trace.selected].component.mask;
    return out;
}

BinaryMask select_top_confidence(const std::vector<Instance>& target_instances) {
    const Instance* best = nullptr;
    for (const auto& inst : target_instances) {
        if (inst.mask.none()) {
            continue;
        }
        if (!best || inst.confidence > best->confidence ||
            (inst.confidence == best->confidence &&
             (inst.mask.count() > best->mask.count() ||
              (inst.mask.count() == best->mask.count() &&
               inst.mask.first_index() < best->mask.first_index())))) {
            best = &inst;
        }
    }
    if (!best) {
        throw Error(ErrorCode::NoTargetFound, "no target instances");
    }
    return best->mask;
}

nlohmann::json RefinementTrace::to_json() const {
    nlohmann::json instances = nlohmann::json::array();
    for (std::size_t i = 0; i < scored.size(); ++i) {
        const auto& s = scored[i];
        nlohmann::json j{{"index", i},
                         {"concept", s.instance.query},
                         {"sigma_safe", s.instance.confidence},
                         {"genuineness", s.genuineness},
                         {"area", s.instance.mask.count()}};
        j["best_conflict"] = s.best_conflict ? nlohmann::json(*s.best_conflict) : nlohmann::json(nullptr);
        instances.push_back(std::move(j));
    }
    nlohmann::json comps = nlohmann::json::array();
    for (std::size_t k = 0; k < components.size(); ++k) {
        const auto& c = components[k];
        const auto& b = c.component.bbox;
        comps.push_back({{"id", k},
                         {"g_star", c.g_star},
                         {"sigma_star", c.sigma_star},
                         {"score", c.score},
                         {"area", c.component.area},
                         {"bbox", {b.min_x, b.min_y, b.max_x, b.max_y}},
                         {"contributors", c.contributors}});
    }
    return {{"instances", instances}, {"components", comps}, {"selected", selected}};
}

} // namespace cgvd
