#pragma once

#include "cgvd/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace cgvd::kernels::detail {

inline std::uint8_t round_half_up(double v) {
    const double r = std::floor(v + 0.5);
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

inline int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

// One SOR update of an unknown pixel; returns |delta|. Out-of-frame
// neighbours are skipped (Neumann border).
inline double relax_pixel(double* field, Extent e, int x, int y, double omega) {
    const std::size_t i = std::size_t(y) * e.width + x;
    double sum = 0.0;
    int n = 0;
    if (x > 0) { sum += field[i - 1]; ++n; }
    if (x + 1 < e.width) { sum += field[i + 1]; ++n; }
    if (y > 0) { sum += field[i - e.width]; ++n; }
    if (y + 1 < e.height) { sum += field[i + e.width]; ++n; }
    if (n == 0) {
        return 0.0;
    }
    const double delta = omega * (sum / n - field[i]);
    field[i] += delta;
    return std::abs(delta);
}

} // namespace cgvd::kernels::detail
