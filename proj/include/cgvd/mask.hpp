#pragma once

#include "cgvd/image.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cgvd {

/// Row-major boolean raster. One byte per pixel, values 0 or 1.
class BinaryMask {
  public:
    BinaryMask() = default;
    explicit BinaryMask(Extent extent, bool fill = false);

    Extent extent() const { return extent_; }
    int width() const { return extent_.width; }
    int height() const { return extent_.height; }

    bool get(int x, int y) const { return bits_[std::size_t(y) * extent_.width + x] != 0; }
    void set(int x, int y, bool v = true) { bits_[std::size_t(y) * extent_.width + x] = v ? 1 : 0; }
    bool get(std::size_t index) const { return bits_[index] != 0; }

    std::int64_t count() const;
    bool none() const;
    bool any() const { return !none(); }
    // Smallest raster index of a set pixel, or -1.
    std::int64_t first_index() const;
    // a ⊆ b
    bool subset_of(const BinaryMask& other) const;

    std::span<std::uint8_t> bits() { return bits_; }
    std::span<const std::uint8_t> bits() const { return bits_; }

    bool operator==(const BinaryMask&) const = default;

  private:
    Extent extent_;
    std::vector<std::uint8_t> bits_;
};

/// Per-pixel reals in [0, 1].
class SoftMask {
  public:
    SoftMask() = default;
    explicit SoftMask(Extent extent, double fill = 0.0);
    SoftMask(Extent extent, std::vector<double> values);

    Extent extent() const { return extent_; }
    double at(int x, int y) const { return values_[std::size_t(y) * extent_.width + x]; }
    void set(int x, int y, double v);

    std::span<const double> values() const { return values_; }
    double min() const;
    double max() const;

  private:
    Extent extent_;
    std::vector<double> values_;
};

enum class Connectivity { Four = 4, Eight = 8 };

struct BoundingBox {
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    bool operator==(const BoundingBox&) const = default;
};

struct ConnectedComponent {
    BinaryMask mask;
    std::int64_t area = 0;
    BoundingBox bbox;
    double centroid_x = 0.0;
    double centroid_y = 0.0;
    std::int64_t min_index = 0;
};

// Bit set iff value >= threshold. Requires 0 < threshold < 1.
BinaryMask binarize(const SoftMask& m, double threshold);
SoftMask to_soft(const BinaryMask& m);

// Square (Chebyshev) structuring element of the given radius.
BinaryMask dilate(const BinaryMask& m, int radius);

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
BinaryMask intersect(const BinaryMask& a, const BinaryMask& b);
// a AND NOT b
BinaryMask subtract(const BinaryMask& a, const BinaryMask& b);
std::int64_t intersection_count(const BinaryMask& a, const BinaryMask& b);
bool intersects(const BinaryMask& a, const BinaryMask& b);

// |a∩b| / |a∪b|, 0 when both are empty.
double iou(const BinaryMask& a, const BinaryMask& b);

// Ordered by smallest raster index.
std::vector<ConnectedComponent> connected_components(const BinaryMask& m,
                                                     Connectivity conn = Connectivity::Eight);

// Separable, edge-clamped, kernel truncated at ceil(3 sigma). Output clamped to [0, 1].
SoftMask gaussian_blur(const BinaryMask& m, double sigma);

} // namespace cgvd
