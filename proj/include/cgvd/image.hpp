#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cgvd {

struct Extent {
    int width = 0;
    int height = 0;

    std::int64_t area() const { return std::int64_t(width) * height; }
    bool empty() const { return width <= 0 || height <= 0; }
    bool operator==(const Extent&) const = default;
};

std::string to_string(Extent e);

// Throws DimensionMismatch naming `what` when the extents differ.
void require_same_extent(Extent a, Extent b, const char* what);

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

/// Interleaved 8-bit RGB raster, row-major.
class Image {
  public:
    Image() = default;
    Image(Extent extent, Rgb fill = {});

    Extent extent() const { return extent_; }
    int width() const { return extent_.width; }
    int height() const { return extent_.height; }
    bool empty() const { return extent_.empty(); }

    Rgb at(int x, int y) const {
        const auto* p = &data_[idx(x, y)];
        return {p[0], p[1], p[2]};
    }
    void set(int x, int y, Rgb c) {
        auto* p = &data_[idx(x, y)];
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }

    std::span<std::uint8_t> data() { return data_; }
    std::span<const std::uint8_t> data() const { return data_; }

    bool operator==(const Image&) const = default;

  private:
    std::size_t idx(int x, int y) const { return (std::size_t(y) * extent_.width + x) * 3; }

    Extent extent_;
    std::vector<std::uint8_t> data_;
};

// Lossless PNG codec (8-bit RGB).
std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(std::span<const std::uint8_t> bytes);
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);

} // namespace cgvd
