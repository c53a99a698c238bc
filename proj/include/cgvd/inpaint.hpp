#pragma once

#include "cgvd/image.hpp"
#include "cgvd/mask.hpp"

#include <atomic>
#include <cstdint>
#include <string>

namespace cgvd {

class Inpainter {
  public:
    virtual ~Inpainter() = default;
    virtual std::string name() const = 0;
    // Fill the masked pixels. Callers go through inpaint(), which enforces locality.
    virtual Image fill(const Image& image, const BinaryMask& mask) = 0;
};

// Validates dimensions and restores every
// out-of-mask pixel from the input so locality holds for any backend.
Image inpaint(Inpainter& backend, const Image& image, const BinaryMask& mask);

/// Every masked pixel gets the per-channel mean of the unmasked pixels,
/// rounded half up. A fully masked image is filled with black.
class MeanColorInpainter final : public Inpainter {
  public:
    std::string name() const override { return "mean"; }
    Image fill(const Image& image, const BinaryMask& mask) override;
};

struct DiffusionConfig {
    double omega = 1.8;  // SOR relaxation factor
    int max_iterations = 500;
    double tolerance = 1e-4;  // on [0,1] intensities
    int coarsest_side = 8;
};

/// Harmonic (Laplace) fill of the masked region, solved coarse to fine: each
/// pyramid level seeds the next finer one, then red-black SOR relaxes it.
class DiffusionInpainter final : public Inpainter {
  public:
    explicit DiffusionInpainter(DiffusionConfig cfg = {}) : cfg_(cfg) {}
    std::string name() const override { return "diffusion"; }
    Image fill(const Image& image, const BinaryMask& mask) override;

    // Iterations used by the finest level of the last fill, per channel max.
    int last_iterations() const { return last_iterations_; }

  private:
    DiffusionConfig cfg_;
    int last_iterations_ = 0;
};

class CountingInpainter final : public Inpainter {
  public:
    explicit CountingInpainter(Inpainter& inner) : inner_(inner) {}
    std::string name() const override { return inner_.name(); }
    Image fill(const Image& image, const BinaryMask& mask) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_.fill(image, mask);
    }
    std::int64_t calls() const { return calls_.load(); }

  private:
    Inpainter& inner_;
    std::atomic<std::int64_t> calls_{0};
};

} // namespace cgvd
