#pragma once

// Independent reference implementations used as test oracles, plus random
// generators. Nothing here calls the library's algorithms.

#include "cgvd/image.hpp"
#include "cgvd/mask.hpp"
#include "cgvd/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace testutil {

using cgvd::BinaryMask;
using cgvd::Extent;
using cgvd::Image;
using cgvd::Instance;

inline BinaryMask random_mask(std::mt19937_64& rng, Extent e, double density) {
    std::bernoulli_distribution on(density);
    BinaryMask m(e);
    for (int y = 0; y < e.height; ++y)
        for (int x = 0; x < e.width; ++x)
            if (on(rng)) m.set(x, y);
    return m;
}

// A few random axis-aligned rectangles.
inline BinaryMask random_blobs(std::mt19937_64& rng, Extent e, int count) {
    BinaryMask m(e);
    for (int k = 0; k < count; ++k) {
        const int w = 1 + int(rng() % std::uint64_t(std::max(1, e.width / 3)));
        const int h = 1 + int(rng() % std::uint64_t(std::max(1, e.height / 3)));
        const int x0 = int(rng() % std::uint64_t(e.width));
        const int y0 = int(rng() % std::uint64_t(e.height));
        for (int y = y0; y < std::min(e.height, y0 + h); ++y)
            for (int x = x0; x < std::min(e.width, x0 + w); ++x) m.set(x, y);
    }
    return m;
}

inline Image random_image(std::mt19937_64& rng, Extent e) {
    Image img(e);
    for (auto& b : img.data()) b = std::uint8_t(rng() & 0xff);
    return img;
}

inline std::int64_t count_bits(const BinaryMask& m) {
    std::int64_t n = 0;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) n += m.get(x, y) ? 1 : 0;
    return n;
}

// Every output pixel checks its whole Chebyshev neighbourhood.
inline BinaryMask brute_dilate(const BinaryMask& m, int r) {
    BinaryMask out(m.extent());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            bool hit = false;
            for (int dy = -r; dy <= r && !hit; ++dy)
                for (int dx = -r; dx <= r && !hit; ++dx) {
                    const int sx = x + dx, sy = y + dy;
                    if (sx >= 0 && sy >= 0 && sx < m.width() && sy < m.height() && m.get(sx, sy)) hit = true;
                }
            if (hit) out.set(x, y);
        }
    return out;
}

// BFS labelling; labels numbered in raster order of each component's first pixel.
inline std::vector<int> flood_labels(const BinaryMask& m, int connectivity, int* count) {
    const int w = m.width(), h = m.height();
    std::vector<int> label(std::size_t(w) * h, -1);
    int next = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!m.get(x, y) || label[std::size_t(y) * w + x] >= 0) continue;
            std::deque<std::pair<int, int>> q{{x, y}};
            label[std::size_t(y) * w + x] = next;
            while (!q.empty()) {
                auto [cx, cy] = q.front();
                q.pop_front();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        if (connectivity == 4 && dx != 0 && dy != 0) continue;
                        const int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h || !m.get(nx, ny)) continue;
                        auto& l = label[std::size_t(ny) * w + nx];
                        if (l < 0) {
                            l = next;
                            q.emplace_back(nx, ny);
                        }
                    }
            }
            ++next;
        }
    *count = next;
    return label;
}

// Direct 2-D convolution with a normalized, truncated Gaussian and edge clamping.
inline std::vector<double> dense_blur(const BinaryMask& m, double sigma) {
    const int r = int(std::ceil(3.0 * sigma));
    double norm = 0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) norm += std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
    const int w = m.width(), h = m.height();
    std::vector<double> out(std::size_t(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const int sx = std::clamp(x + dx, 0, w - 1), sy = std::clamp(y + dy, 0, h - 1);
                    if (m.get(sx, sy)) acc += std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
                }
            out[std::size_t(y) * w + x] = acc / norm;
        }
    return out;
}

inline double pixel_iou(const BinaryMask& a, const BinaryMask& b) {
    std::int64_t inter = 0, uni = 0;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            inter += (a.get(x, y) && b.get(x, y)) ? 1 : 0;
            uni += (a.get(x, y) || b.get(x, y)) ? 1 : 0;
        }
    return uni == 0 ? 0.0 : double(inter) / double(uni);
}

struct OracleResult {
    std::vector<double> genuineness;
    std::vector<double> scores;  // per component, raster order
    BinaryMask selected;
};

// Exhaustive refinement: every (target, distractor) IoU, every
// (component, instance) pairing, then the total order score/area/raster index.
inline OracleResult oracle_refine(const std::vector<Instance>& targets, const std::vector<Instance>& distractors,
                                  double eta, int connectivity = 8) {
    OracleResult r;
    for (const auto& s : targets) {
        double worst = 0;
        bool any = false;
        for (const auto& d : distractors) {
            if (pixel_iou(s.mask, d.mask) > eta) {
                worst = any ? std::max(worst, d.confidence) : d.confidence;
                any = true;
            }
        }
        r.genuineness.push_back(s.confidence - worst);
    }
    const Extent e = targets.front().mask.extent();
    BinaryMask uni(e);
    for (const auto& s : targets)
        for (int y = 0; y < e.height; ++y)
            for (int x = 0; x < e.width; ++x)
                if (s.mask.get(x, y)) uni.set(x, y);
    int n = 0;
    const auto labels = flood_labels(uni, connectivity, &n);
    int best = -1;
    double best_score = 0;
    std::int64_t best_area = 0;
    for (int c = 0; c < n; ++c) {
        double g = 0, sigma = 0;
        bool any = false;
        std::int64_t area = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) area += labels[i] == c ? 1 : 0;
        for (std::size_t k = 0; k < targets.size(); ++k) {
            bool touches = false;
            for (std::size_t i = 0; i < labels.size() && !touches; ++i)
                touches = labels[i] == c && targets[k].mask.get(i);
            if (!touches) continue;
            g = any ? std::max(g, r.genuineness[k]) : r.genuineness[k];
            sigma = any ? std::max(sigma, targets[k].confidence) : targets[k].confidence;
            any = true;
        }
        const double score = (1.0 + g) * sigma;
        r.scores.push_back(score);
        // components come in raster order, so a later one only wins on score or area
        if (best < 0 || score > best_score || (score == best_score && area > best_area)) {
            best = c;
            best_score = score;
            best_area = area;
        }
    }
    r.selected = BinaryMask(e);
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == best) r.selected.set(int(i % e.width), int(i / e.width));
    return r;
}

// Small random refinement scene: up to 6 instances on at most 64x64, with
// distractors that often duplicate or perturb a target mask.
struct RandomScene {
    std::vector<Instance> targets;
    std::vector<Instance> distractors;
};

inline double quantized_confidence(std::mt19937_64& rng) { return double(rng() % 21) / 20.0; }

inline RandomScene random_refinement_scene(std::mt19937_64& rng) {
    RandomScene s;
    const Extent e{8 + int(rng() % 57), 8 + int(rng() % 57)};
    const int total = 1 + int(rng() % 6);
    const int nt = 1 + int(rng() % std::uint64_t(total));
    for (int i = 0; i < nt; ++i) {
        BinaryMask m = random_blobs(rng, e, 1 + int(rng() % 3));
        if (count_bits(m) == 0) m.set(0, 0);
        s.targets.push_back({m, quantized_confidence(rng), "target"});
    }
    for (int j = nt; j < total; ++j) {
        BinaryMask m;
        if (rng() % 2 == 0) {
            m = s.targets[rng() % s.targets.size()].mask;  // same object seen through another query
            if (rng() % 2 == 0) {
                auto extra = random_blobs(rng, e, 1);
                for (int y = 0; y < e.height; ++y)
                    for (int x = 0; x < e.width; ++x)
                        if (extra.get(x, y)) m.set(x, y);
            }
        } else {
            m = random_blobs(rng, e, 1 + int(rng() % 2));
        }
        if (count_bits(m) == 0) m.set(e.width - 1, e.height - 1);
        s.distractors.push_back({m, quantized_confidence(rng), "distractor"});
    }
    return s;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("cgvd_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace testutil
