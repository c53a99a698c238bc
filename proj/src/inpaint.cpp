#include "cgvd/inpaint.hpp"

#include "cgvd/error.hpp"
#include "cgvd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cgvd {

Image inpaint(Inpainter& backend, const Image& image, const BinaryMask& mask) {
    require_same_extent(mask.extent(), image.extent(), "inpaint mask vs image");
    Image filled = backend.fill(image, mask);
    require_same_extent(filled.extent(), image.extent(), "inpaint result vs image");
    auto out = filled.data();
    auto in = image.data();
    auto bits = mask.bits();
    for (std::size_t p = 0; p < bits.size(); ++p) {
        if (!bits[p]) {
            out[p * 3] = in[p * 3];
            out[p * 3 + 1] = in[p * 3 + 1];
            out[p * 3 + 2] = in[p * 3 + 2];
        }
    }
    return filled;
}

Image MeanColorInpainter::fill(const Image& image, const BinaryMask& mask) {
    std::uint64_t sum[3] = {0, 0, 0};
    std::uint64_t n = 0;
    auto data = image.data();
    auto bits = mask.bits();
    for (std::size_t p = 0; p < bits.size(); ++p) {
        if (!bits[p]) {
            for (int c = 0; c < 3; ++c) {
                sum[c] += data[p * 3 + std::size_t(c)];
            }
            ++n;
        }
    }
    std::uint8_t mean[3] = {0, 0, 0};
    if (n > 0) {
        for (int c = 0; c < 3; ++c) {
            mean[c] = std::uint8_t((2 * sum[c] + n) / (2 * n));
        }
    }
    Image out = image;
    auto o = out.data();
    for (std::size_t p = 0; p < bits.size(); ++p) {
        if (bits[p]) {
            for (int c = 0; c < 3; ++c) {
                o[p * 3 + std::size_t(c)] = mean[c];
            }
        }
    }
    return out;
}

namespace {

struct Level {
    Extent extent;
    std::vector<double> value;        // one channel
    std::vector<std::uint8_t> unknown;
};

// Averages the known fine pixels of each 2x2 block; a coarse pixel is
// unknown only if its whole block is.
Level downsample(const Level& fine) {
    Level coarse;
    coarse.extent = {(fine.extent.width + 1) / 2, (fine.extent.height + 1) / 2};
    const std::size_t n = std::size_t(coarse.extent.area());
    coarse.value.assign(n, 0.0);
    coarse.unknown.assign(n, 1);
    for (int y = 0; y < coarse.extent.height; ++y) {
        for (int x = 0; x < coarse.extent.width; ++x) {
            double sum = 0.0;
            int known = 0;
            for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                    const int fx = 2 * x + dx, fy = 2 * y + dy;
                    if (fx >= fine.extent.width || fy >= fine.extent.height) {
                        continue;
                    }
                    const std::size_t i = std::size_t(fy) * fine.extent.width + fx;
                    if (!fine.unknown[i]) {
                        sum += fine.value[i];
                        ++known;
                    }
                }
            }
            const std::size_t j = std::size_t(y) * coarse.extent.width + x;
            if (known > 0) {
                coarse.value[j] = sum / known;
                coarse.unknown[j] = 0;
            }
        }
    }
    return coarse;
}

int solve(Level& level, const DiffusionConfig& cfg) {
    const bool any_unknown =
        std::any_of(level.unknown.begin(), level.unknown.end(), [](std::uint8_t u) { return u != 0; });
    if (!any_unknown) {
        return 0;
    }
    const bool any_known =
        std::any_of(level.unknown.begin(), level.unknown.end(), [](std::uint8_t u) { return u == 0; });
    if (!any_known) {
        // Nothing to diffuse from.
        std::fill(level.value.begin(), level.value.end(), 0.0);
        return 0;
    }
    if (std::min(level.extent.width, level.extent.height) > cfg.coarsest_side) {
        Level coarse = downsample(level);
        solve(coarse, cfg);
        for (int y = 0; y < level.extent.height; ++y) {
            for (int x = 0; x < level.extent.width; ++x) {
                const std::size_t i = std::size_t(y) * level.extent.width + x;
                if (level.unknown[i]) {
                    level.value[i] = coarse.value[std::size_t(y / 2) * coarse.extent.width + x / 2];
                }
            }
        }
    } else {
        // Seed the coarsest level with the known mean.
        double sum = 0.0;
        int n = 0;
        for (std::size_t i = 0; i < level.value.size(); ++i) {
            if (!level.unknown[i]) {
                sum += level.value[i];
                ++n;
            }
        }
        for (std::size_t i = 0; i < level.value.size(); ++i) {
            if (level.unknown[i]) {
                level.value[i] = sum / n;
            }
        }
    }
    return kernels::omp::relax_harmonic(level.value, level.unknown, level.extent, cfg.omega,
                                        cfg.max_iterations, cfg.tolerance)
        .iterations;
}

} // namespace

Image DiffusionInpainter::fill(const Image& image, const BinaryMask& mask) {
    require_same_extent(mask.extent(), image.extent(), "diffusion inpaint");
    Image out = image;
    auto data = out.data();
    const std::size_t n = std::size_t(image.extent().area());
    last_iterations_ = 0;
    for (int c = 0; c < 3; ++c) {
        Level level;
        level.extent = image.extent();
        level.value.resize(n);
        level.unknown.assign(mask.bits().begin(), mask.bits().end());
        for (std::size_t p = 0; p < n; ++p) {
            level.value[p] = data[p * 3 + std::size_t(c)] / 255.0;
        }
        last_iterations_ = std::max(last_iterations_, solve(level, cfg_));
        for (std::size_t p = 0; p < n; ++p) {
            if (level.unknown[p]) {
                const double v = std::floor(std::clamp(level.value[p], 0.0, 1.0) * 255.0 + 0.5);
                data[p * 3 + std::size_t(c)] = std::uint8_t(v);
            }
        }
    }
    return out;
}

} // namespace cgvd
