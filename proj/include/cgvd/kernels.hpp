#pragma once

// Data-parallel raster kernels.
//
// Every kernel exists twice: `serial::` is the straightforward reference kept
// for testing, `omp::` is the OpenMP version the library calls. The two must
// agree bit-exactly; tests/kernels_test.cpp enforces this and
// bench/kernel_bench.cpp compares their timings.

#include "cgvd/image.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cgvd::kernels {

// Normalized 1-D Gaussian taps, radius ceil(3 sigma). sigma must be > 0.
std::vector<double> gaussian_taps(double sigma);

struct RelaxResult {
    int iterations = 0;
    double residual = 0.0;  // max |update| in the last sweep
};

namespace serial {

void dilate_square(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, Extent e,
                   int radius);

void gaussian_blur(std::span<const double> in, std::span<double> out, Extent e, double sigma);

// out = round_half_up(alpha * clean + (1 - alpha) * live), per channel.
void blend(std::span<const std::uint8_t> clean, std::span<const std::uint8_t> live,
           std::span<const double> alpha, std::span<std::uint8_t> out, Extent e);

// out(p) = live(p) wherever mask(p) is set.
void overwrite(std::span<const std::uint8_t> live, std::span<const std::uint8_t> mask,
               std::span<std::uint8_t> out, Extent e);

// Red-black SOR on the Laplace equation over `unknown` pixels of one channel.
// Known pixels are Dirichlet data; the frame border is Neumann.
RelaxResult relax_harmonic(std::span<double> field, std::span<const std::uint8_t> unknown,
                           Extent e, double omega, int max_iterations, double tolerance);

} // namespace serial

namespace omp {

void dilate_square(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, Extent e,
                   int radius);
void gaussian_blur(std::span<const double> in, std::span<double> out, Extent e, double sigma);
void blend(std::span<const std::uint8_t> clean, std::span<const std::uint8_t> live,
           std::span<const double> alpha, std::span<std::uint8_t> out, Extent e);
void overwrite(std::span<const std::uint8_t> live, std::span<const std::uint8_t> mask,
               std::span<std::uint8_t> out, Extent e);
RelaxResult relax_harmonic(std::span<double> field, std::span<const std::uint8_t> unknown,
                           Extent e, double omega, int max_iterations, double tolerance);

} // namespace omp

} // namespace cgvd::kernels
