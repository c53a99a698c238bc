#include "cgvd/kernels.hpp"

#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cgvd::kernels {

std::vector<double> gaussian_taps(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(std::size_t(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double w = std::exp(-double(k) * k / (2.0 * sigma * sigma));
        taps[std::size_t(k + radius)] = w;
        sum += w;
    }
    for (auto& t : taps) {
        t /= sum;
    }
    return taps;
}

namespace serial {

void dilate_square(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, Extent e,
                   int radius) {
    for (int y = 0; y < e.height; ++y) {
        for (int x = 0; x < e.width; ++x) {
            std::uint8_t hit = 0;
            const int y0 = std::max(0, y - radius), y1 = std::min(e.height - 1, y + radius);
            const int x0 = std::max(0, x - radius), x1 = std::min(e.width - 1, x + radius);
            for (int yy = y0; yy <= y1 && !hit; ++yy) {
                for (int xx = x0; xx <= x1; ++xx) {
                    if (in[std::size_t(yy) * e.width + xx]) {
                        hit = 1;
                        break;
                    }
                }
            }
            out[std::size_t(y) * e.width + x] = hit;
        }
    }
}

void gaussian_blur(std::span<const double> in, std::span<double> out, Extent e, double sigma) {
    const auto taps = gaussian_taps(sigma);
    const int radius = int(taps.size() / 2);
    std::vector<double> tmp(in.size());
    for (int y = 0; y < e.height; ++y) {
        for (int x = 0; x < e.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int xx = detail::clamp_index(x + k, e.width);
                acc += taps[std::size_t(k + radius)] * in[std::size_t(y) * e.width + xx];
            }
            tmp[std::size_t(y) * e.width + x] = acc;
        }
    }
    for (int y = 0; y < e.height; ++y) {
        for (int x = 0; x < e.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int yy = detail::clamp_index(y + k, e.height);
                acc += taps[std::size_t(k + radius)] * tmp[std::size_t(yy) * e.width + x];
            }
            out[std::size_t(y) * e.width + x] = std::clamp(acc, 0.0, 1.0);
        }
    }
}

void blend(std::span<const std::uint8_t> clean, std::span<const std::uint8_t> live,
           std::span<const double> alpha, std::span<std::uint8_t> out, Extent e) {
    const std::size_t n = std::size_t(e.area());
    for (std::size_t p = 0; p < n; ++p) {
        const double a = alpha[p];
        for (std::size_t c = 0; c < 3; ++c) {
            const std::size_t i = p * 3 + c;
            out[i] = detail::round_half_up(a * clean[i] + (1.0 - a) * live[i]);
        }
    }
}

void overwrite(std::span<const std::uint8_t> live, std::span<const std::uint8_t> mask,
               std::span<std::uint8_t> out, Extent e) {
    const std::size_t n = std::size_t(e.area());
    for (std::size_t p = 0; p < n; ++p) {
        if (mask[p]) {
            out[p * 3] = live[p * 3];
            out[p * 3 + 1] = live[p * 3 + 1];
            out[p * 3 + 2] = live[p * 3 + 2];
        }
    }
}

RelaxResult relax_harmonic(std::span<double> field, std::span<const std::uint8_t> unknown,
                           Extent e, double omega, int max_iterations, double tolerance) {
    RelaxResult result;
    for (int it = 0; it < max_iterations; ++it) {
        double residual = 0.0;
        for (int color = 0; color < 2; ++color) {
            for (int y = 0; y < e.height; ++y) {
                for (int x = (y + color) & 1; x < e.width; x += 2) {
                    if (unknown[std::size_t(y) * e.width + x]) {
                        residual = std::max(
                            residual, detail::relax_pixel(field.data(), e, x, y, omega));
                    }
                }
            }
        }
        result.iterations = it + 1;
        result.residual = residual;
        if (residual < tolerance) {
            break;
        }
    }
    return result;
}

} // namespace serial
} // namespace cgvd::kernels
