#include "cgvd/kernels.hpp"

#include "common.hpp"

#include <algorithm>
#include <vector>

namespace cgvd::kernels::omp {

// Separable square dilation: a window count over prefix sums, rows then columns.
void dilate_square(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, Extent e,
                   int radius) {
    const int w = e.width, h = e.height;
    if (radius == 0) {
        std::copy(in.begin(), in.end(), out.begin());
        return;
    }
    std::vector<std::uint8_t> rows(in.size());

#pragma omp parallel
    {
        std::vector<int> prefix(std::size_t(std::max(w, h)) + 1);

#pragma omp for schedule(static)
        for (int y = 0; y < h; ++y) {
            const std::uint8_t* src = in.data() + std::size_t(y) * w;
            prefix[0] = 0;
            for (int x = 0; x < w; ++x) {
                prefix[std::size_t(x) + 1] = prefix[std::size_t(x)] + (src[x] != 0);
            }
            std::uint8_t* dst = rows.data() + std::size_t(y) * w;
            for (int x = 0; x < w; ++x) {
                const int lo = std::max(0, x - radius), hi = std::min(w - 1, x + radius);
                dst[x] = prefix[std::size_t(hi) + 1] - prefix[std::size_t(lo)] > 0;
            }
        }

#pragma omp for schedule(static)
        for (int x = 0; x < w; ++x) {
            prefix[0] = 0;
            for (int y = 0; y < h; ++y) {
                prefix[std::size_t(y) + 1] =
                    prefix[std::size_t(y)] + (rows[std::size_t(y) * w + x] != 0);
            }
            for (int y = 0; y < h; ++y) {
                const int lo = std::max(0, y - radius), hi = std::min(h - 1, y + radius);
                out[std::size_t(y) * w + x] =
                    prefix[std::size_t(hi) + 1] - prefix[std::size_t(lo)] > 0;
            }
        }
    }
}

void gaussian_blur(std::span<const double> in, std::span<double> out, Extent e, double sigma) {
    const auto taps = gaussian_taps(sigma);
    const int radius = int(taps.size() / 2);
    const int w = e.width, h = e.height;
    std::vector<double> tmp(in.size());

#pragma omp parallel
    {
#pragma omp for schedule(static)
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    const int xx = detail::clamp_index(x + k, w);
                    acc += taps[std::size_t(k + radius)] * in[std::size_t(y) * w + xx];
                }
                tmp[std::size_t(y) * w + x] = acc;
            }
        }

#pragma omp for schedule(static)
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    const int yy = detail::clamp_index(y + k, h);
                    acc += taps[std::size_t(k + radius)] * tmp[std::size_t(yy) * w + x];
                }
                out[std::size_t(y) * w + x] = std::clamp(acc, 0.0, 1.0);
            }
        }
    }
}

void blend(std::span<const std::uint8_t> clean, std::span<const std::uint8_t> live,
           std::span<const double> alpha, std::span<std::uint8_t> out, Extent e) {
    const std::int64_t n = e.area();
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < n; ++p) {
        const double a = alpha[std::size_t(p)];
        for (std::size_t c = 0; c < 3; ++c) {
            const std::size_t i = std::size_t(p) * 3 + c;
            out[i] = detail::round_half_up(a * clean[i] + (1.0 - a) * live[i]);
        }
    }
}

void overwrite(std::span<const std::uint8_t> live, std::span<const std::uint8_t> mask,
               std::span<std::uint8_t> out, Extent e) {
    const std::int64_t n = e.area();
#pragma omp parallel for schedule(static)
    for (std::int64_t p = 0; p < n; ++p) {
        if (mask[std::size_t(p)]) {
            const std::size_t i = std::size_t(p) * 3;
            out[i] = live[i];
            out[i + 1] = live[i + 1];
            out[i + 2] = live[i + 2];
        }
    }
}

// Same-colour pixels never neighbour each other, so each half-sweep is
// order independent and matches the serial sweep bit for bit.
RelaxResult relax_harmonic(std::span<double> field, std::span<const std::uint8_t> unknown,
                           Extent e, double omega, int max_iterations, double tolerance) {
    RelaxResult result;
    const int w = e.width, h = e.height;
    for (int it = 0; it < max_iterations; ++it) {
        double residual = 0.0;
        for (int color = 0; color < 2; ++color) {
#pragma omp parallel for schedule(static) reduction(max : residual)
            for (int y = 0; y < h; ++y) {
                for (int x = (y + color) & 1; x < w; x += 2) {
                    if (unknown[std::size_t(y) * w + x]) {
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

} // namespace cgvd::kernels::omp
