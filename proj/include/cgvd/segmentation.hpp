#pragma once

// Text-prompted instance segmentation: Seg(o, c) -> instances.

#include "cgvd/image.hpp"
#include "cgvd/mask.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cgvd {

struct Instance {
    BinaryMask mask;
    double confidence = 0.0;
    std::string query;
};

class Segmenter {
  public:
    virtual ~Segmenter() = default;
    virtual std::string name() const = 0;
    // Implementations must tolerate concurrent calls for distinct concepts.
    virtual std::vector<Instance> segment(const Image& image, const std::string& query) = 0;
};

using ConceptInstances = std::map<std::string, std::vector<Instance>>;

// Checks dimensions and confidence range, drops zero-area masks with a warning.
// Mismatched dimensions raise DimensionMismatch; they are never cropped.
std::vector<Instance> validate_instances(std::vector<Instance> instances, Extent extent,
                                         const std::string& backend);

// One independent query per concept. With `parallel`, channels are fetched concurrently.
ConceptInstances segment_set(Segmenter& backend, const Image& image,
                             const std::vector<std::string>& concepts, bool parallel = false);

BinaryMask union_channel(std::span<const Instance> instances, Extent extent);

/// Counts calls; wraps another backend.
class CountingSegmenter final : public Segmenter {
  public:
    explicit CountingSegmenter(Segmenter& inner) : inner_(inner) {}
    std::string name() const override { return inner_.name(); }
    std::vector<Instance> segment(const Image& image, const std::string& query) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_.segment(image, query);
    }
    std::int64_t calls() const { return calls_.load(); }

  private:
    Segmenter& inner_;
    std::atomic<std::int64_t> calls_{0};
};

// ---------------------------------------------------------------------------
// Mock backend: ground-truth objects plus a confusion table.
// ---------------------------------------------------------------------------

/// Constant when stddev == 0, otherwise Gaussian clipped to [0, 1].
struct ConfidenceDist {
    double mean = 0.9;
    double stddev = 0.0;
};

struct ConfusionRule {
    std::string object;  // object phrase, e.g. "spoon with green handle"
    std::string query;
    bool detect = true;
    ConfidenceDist confidence;
};

class ConfusionModel {
  public:
    ConfusionModel() = default;
    ConfusionModel(std::vector<ConfusionRule> rules, std::optional<ConfidenceDist> self_rule);

    // Explicit rule first; otherwise the self rule when object == query.
    std::optional<ConfusionRule> lookup(const std::string& object, const std::string& query) const;

    const std::vector<ConfusionRule>& rules() const { return rules_; }
    const std::optional<ConfidenceDist>& self_rule() const { return self_rule_; }

    nlohmann::json to_json() const;
    static ConfusionModel from_json(const nlohmann::json& j);

  private:
    std::vector<ConfusionRule> rules_;
    std::optional<ConfidenceDist> self_rule_;
};

struct MockObject {
    std::string id;
    std::string phrase;
    BinaryMask mask;
};

struct MockScene {
    Extent extent;
    std::vector<MockObject> objects;
    ConfusionModel confusion;
    std::uint64_t seed = 0;
};

// Deterministic in (seed, object id, query); independent of other queries.
double sample_confidence(const ConfidenceDist& dist, std::uint64_t seed, const std::string& object_id,
                         const std::string& query);

class MockSegmenter final : public Segmenter {
  public:
    explicit MockSegmenter(MockScene scene);
    std::string name() const override { return "mock"; }
    std::vector<Instance> segment(const Image& image, const std::string& query) override;
    const MockScene& scene() const { return scene_; }

  private:
    MockScene scene_;
};

} // namespace cgvd
