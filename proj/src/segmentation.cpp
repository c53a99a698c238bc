#include "cgvd/segmentation.hpp"

#include "cgvd/codec.hpp"
#include "cgvd/error.hpp"
#include "cgvd/instruction.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <future>
#include <random>

namespace cgvd {

std::vector<Instance> validate_instances(std::vector<Instance> instances, Extent extent,
                                         const std::string& backend) {
    std::vector<Instance> kept;
    kept.reserve(instances.size());
    for (auto& inst : instances) {
        require_same_extent(inst.mask.extent(), extent, "instance mask vs image");
        if (!(inst.confidence >= 0.0 && inst.confidence <= 1.0)) {
            throw Error(ErrorCode::ProtocolError,
                        backend + ": confidence outside [0,1] for '" + inst.query + "'");
        }
        if (inst.mask.none()) {
            spdlog::warn("{}: dropping zero-area instance for '{}'", backend, inst.query);
            continue;
        }
        kept.push_back(std::move(inst));
    }
    return kept;
}

ConceptInstances segment_set(Segmenter& backend, const Image& image,
                             const std::vector<std::string>& concepts, bool parallel) {
    ConceptInstances out;
    if (!parallel) {
        for (const auto& c : concepts) {
            if (!out.count(c)) {
                out[c] = validate_instances(backend.segment(image, c), image.extent(), backend.name());
            }
        }
        return out;
    }
    std::vector<std::pair<std::string, std::future<std::vector<Instance>>>> pending;
    for (const auto& c : concepts) {
        const bool seen = std::any_of(pending.begin(), pending.end(),
                                      [&](const auto& p) { return p.first == c; });
        if (!seen) {
            pending.emplace_back(c, std::async(std::launch::async, [&backend, &image, c] {
                                     return backend.segment(image, c);
                                 }));
        }
    }
    // Collect every channel before rethrowing so no task outlives its inputs.
    std::exception_ptr first_error;
    for (auto& [c, fut] : pending) {
        try {
            out[c] = validate_instances(fut.get(), image.extent(), backend.name());
        } catch (...) {
            if (!first_error) {
                first_error = std::current_exception();
            }
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
    return out;
}

BinaryMask union_channel(std::span<const Instance> instances, Extent extent) {
    BinaryMask out(extent);
    for (const auto& inst : instances) {
        out = mask_union(out, inst.mask);
    }
    return out;
}

ConfusionModel::ConfusionModel(std::vector<ConfusionRule> rules,
                               std::optional<ConfidenceDist> self_rule)
    : rules_(std::move(rules)), self_rule_(self_rule) {
    auto check = [](const ConfidenceDist& d) {
        if (!(d.mean >= 0.0 && d.mean <= 1.0) || d.stddev < 0.0) {
            throw Error(ErrorCode::InvalidConfig, "confusion confidence outside [0,1]");
        }
    };
    for (const auto& r : rules_) {
        check(r.confidence);
    }
    if (self_rule_) {
        check(*self_rule_);
    }
}

std::optional<ConfusionRule> ConfusionModel::lookup(const std::string& object,
                                                    const std::string& query) const {
    for (const auto& r : rules_) {
        if (same_concept(r.object, object) && same_concept(r.query, query)) {
            return r;
        }
    }
    if (self_rule_ && same_concept(object, query)) {
        return ConfusionRule{object, query, true, *self_rule_};
    }
    return std::nullopt;
}

namespace {

nlohmann::json dist_json(const ConfidenceDist& d) {
    return {{"mean", d.mean}, {"stddev", d.stddev}};
}

ConfidenceDist dist_from(const nlohmann::json& j) {
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    return {j.at("mean").get<double>(), j.value("stddev", 0.0)};
}

} // namespace

nlohmann::json ConfusionModel::to_json() const {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& r : rules_) {
        rules.push_back({{"object", r.object},
                         {"query", r.query},
                         {"detect", r.detect},
                         {"confidence", dist_json(r.confidence)}});
    }
    nlohmann::json j{{"rules", rules}};
    j["self"] = self_rule_ ? dist_json(*self_rule_) : nlohmann::json(nullptr);
    return j;
}

ConfusionModel ConfusionModel::from_json(const nlohmann::json& j) {
    std::vector<ConfusionRule> rules;
    for (const auto& r : j.value("rules", nlohmann::json::array())) {
        ConfusionRule rule;
        rule.object = r.at("object").get<std::string>();
        rule.query = r.at("query").get<std::string>();
        rule.detect = r.value("detect", true);
        if (r.contains("confidence")) {
            rule.confidence = dist_from(r.at("confidence"));
        }
        rules.push_back(std::move(rule));
    }
    std::optional<ConfidenceDist> self_rule;
    if (j.contains("self") && !j.at("self").is_null()) {
        self_rule = dist_from(j.at("self"));
    }
    return ConfusionModel(std::move(rules), self_rule);
}

double sample_confidence(const ConfidenceDist& dist, std::uint64_t seed, const std::string& object_id,
                         const std::string& query) {
    if (dist.stddev == 0.0) {
        return std::clamp(dist.mean, 0.0, 1.0);
    }
    std::uint64_t key = fnv1a(object_id, fnv1a(std::to_string(seed)));
    key = fnv1a("\x1f", key);
    std::string q(query);
    std::transform(q.begin(), q.end(), q.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    key = fnv1a(q, key);
    std::mt19937_64 rng(key);
    std::normal_distribution<double> normal(dist.mean, dist.stddev);
    return std::clamp(normal(rng), 0.0, 1.0);
}

MockSegmenter::MockSegmenter(MockScene scene) : scene_(std::move(scene)) {
    for (const auto& obj : scene_.objects) {
        require_same_extent(obj.mask.extent(), scene_.extent, "mock object mask");
    }
}

std::vector<Instance> MockSegmenter::segment(const Image& image, const std::string& query) {
    if (image.empty()) {
        throw Error(ErrorCode::InvalidConfig, "segment: empty image");
    }
    if (query.empty()) {
        throw Error(ErrorCode::InvalidConfig, "segment: empty concept");
    }
    require_same_extent(image.extent(), scene_.extent, "mock segment");
    std::vector<Instance> out;
    for (const auto& obj : scene_.objects) {
        const auto rule = scene_.confusion.lookup(obj.phrase, query);
        if (!rule || !rule->detect || obj.mask.none()) {
            continue;
        }
        out.push_back({obj.mask, sample_confidence(rule->confidence, scene_.seed, obj.id, query), query});
    }
    return out;
}

} // namespace cgvd
