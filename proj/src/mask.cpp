#include "cgvd/mask.hpp"

#include "cgvd/error.hpp"
#include "cgvd/kernels.hpp"

#include <algorithm>
#include <numeric>

namespace cgvd {

BinaryMask::BinaryMask(Extent extent, bool fill)
    : extent_(extent), bits_(std::size_t(std::max<std::int64_t>(extent.area(), 0)), fill ? 1 : 0) {}

std::int64_t BinaryMask::count() const {
    return std::count_if(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; });
}

bool BinaryMask::none() const {
    return std::none_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; });
}

std::int64_t BinaryMask::first_index() const {
    auto it = std::find_if(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; });
    return it == bits_.end() ? -1 : std::int64_t(it - bits_.begin());
}

bool BinaryMask::subset_of(const BinaryMask& other) const {
    require_same_extent(extent_, other.extent_, "subset_of");
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i] && !other.bits_[i]) {
            return false;
        }
    }
    return true;
}

SoftMask::SoftMask(Extent extent, double fill)
    : extent_(extent), values_(std::size_t(std::max<std::int64_t>(extent.area(), 0)), fill) {
    if (fill < 0.0 || fill > 1.0) {
        throw Error(ErrorCode::InvalidConfig, "soft mask value outside [0,1]");
    }
}

SoftMask::SoftMask(Extent extent, std::vector<double> values)
    : extent_(extent), values_(std::move(values)) {
    if (std::int64_t(values_.size()) != extent.area()) {
        throw Error(ErrorCode::DimensionMismatch, "soft mask value count");
    }
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error(ErrorCode::InvalidConfig, "soft mask value outside [0,1]");
        }
    }
}

void SoftMask::set(int x, int y, double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "soft mask value outside [0,1]");
    }
    values_[std::size_t(y) * extent_.width + x] = v;
}

double SoftMask::min() const {
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

double SoftMask::max() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

BinaryMask binarize(const SoftMask& m, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "binarize threshold must lie in (0,1)");
    }
    BinaryMask out(m.extent());
    auto bits = out.bits();
    auto values = m.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        bits[i] = values[i] >= threshold ? 1 : 0;
    }
    return out;
}

SoftMask to_soft(const BinaryMask& m) {
    std::vector<double> values(m.bits().size());
    std::transform(m.bits().begin(), m.bits().end(), values.begin(),
                   [](std::uint8_t b) { return b ? 1.0 : 0.0; });
    return SoftMask(m.extent(), std::move(values));
}

BinaryMask dilate(const BinaryMask& m, int radius) {
    if (radius < 0) {
        throw Error(ErrorCode::InvalidConfig, "dilation radius must be >= 0");
    }
    BinaryMask out(m.extent());
    kernels::omp::dilate_square(m.bits(), out.bits(), m.extent(), radius);
    return out;
}

namespace {

template <typename Op>
BinaryMask pixelwise(const BinaryMask& a, const BinaryMask& b, const char* what, Op op) {
    require_same_extent(a.extent(), b.extent(), what);
    BinaryMask out(a.extent());
    auto o = out.bits();
    auto x = a.bits();
    auto y = b.bits();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = op(x[i] != 0, y[i] != 0) ? 1 : 0;
    }
    return out;
}

} // namespace

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
    return pixelwise(a, b, "union", [](bool p, bool q) { return p || q; });
}

BinaryMask intersect(const BinaryMask& a, const BinaryMask& b) {
    return pixelwise(a, b, "intersect", [](bool p, bool q) { return p && q; });
}

BinaryMask subtract(const BinaryMask& a, const BinaryMask& b) {
    return pixelwise(a, b, "subtract", [](bool p, bool q) { return p && !q; });
}

std::int64_t intersection_count(const BinaryMask& a, const BinaryMask& b) {
    require_same_extent(a.extent(), b.extent(), "intersection");
    std::int64_t n = 0;
    auto x = a.bits();
    auto y = b.bits();
    for (std::size_t i = 0; i < x.size(); ++i) {
        n += (x[i] && y[i]) ? 1 : 0;
    }
    return n;
}

bool intersects(const BinaryMask& a, const BinaryMask& b) {
    require_same_extent(a.extent(), b.extent(), "intersects");
    auto x = a.bits();
    auto y = b.bits();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] && y[i]) {
            return true;
        }
    }
    return false;
}

double iou(const BinaryMask& a, const BinaryMask& b) {
    require_same_extent(a.extent(), b.extent(), "iou");
    std::int64_t inter = 0, uni = 0;
    auto x = a.bits();
    auto y = b.bits();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool p = x[i] != 0, q = y[i] != 0;
        inter += (p && q);
        uni += (p || q);
    }
    return uni == 0 ? 0.0 : double(inter) / double(uni);
}

namespace {

struct DisjointSet {
    std::vector<std::int32_t> parent;

    std::int32_t make() {
        parent.push_back(std::int32_t(parent.size()));
        return parent.back();
    }
    std::int32_t find(std::int32_t x) {
        while (parent[std::size_t(x)] != x) {
            parent[std::size_t(x)] = parent[std::size_t(parent[std::size_t(x)])];
            x = parent[std::size_t(x)];
        }
        return x;
    }
    void unite(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[std::size_t(std::max(a, b))] = std::min(a, b);
        }
    }
};

} // namespace

std::vector<ConnectedComponent> connected_components(const BinaryMask& m, Connectivity conn) {
    const Extent e = m.extent();
    const int w = e.width, h = e.height;
    std::vector<std::int32_t> labels(std::size_t(std::max<std::int64_t>(e.area(), 0)), -1);
    DisjointSet sets;

    // Two-pass labelling over already-visited neighbours.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = std::size_t(y) * w + x;
            if (!m.get(i)) {
                continue;
            }
            std::int32_t label = -1;
            auto visit = [&](int nx, int ny) {
                if (nx < 0 || nx >= w || ny < 0) {
                    return;
                }
                const std::int32_t l = labels[std::size_t(ny) * w + nx];
                if (l < 0) {
                    return;
                }
                if (label < 0) {
                    label = l;
                } else {
                    sets.unite(label, l);
                }
            };
            visit(x - 1, y);
            visit(x, y - 1);
            if (conn == Connectivity::Eight) {
                visit(x - 1, y - 1);
                visit(x + 1, y - 1);
            }
            labels[i] = label >= 0 ? label : sets.make();
        }
    }

    std::vector<std::int32_t> slot(sets.parent.size(), -1);
    std::vector<ConnectedComponent> out;
    std::vector<double> sx, sy;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = std::size_t(y) * w + x;
            if (labels[i] < 0) {
                continue;
            }
            const std::int32_t root = sets.find(labels[i]);
            std::int32_t& s = slot[std::size_t(root)];
            if (s < 0) {
                s = std::int32_t(out.size());
                ConnectedComponent c;
                c.mask = BinaryMask(e);
                c.bbox = {x, y, x, y};
                c.min_index = std::int64_t(i);
                out.push_back(std::move(c));
                sx.push_back(0.0);
                sy.push_back(0.0);
            }
            auto& c = out[std::size_t(s)];
            c.mask.set(x, y);
            ++c.area;
            c.bbox.min_x = std::min(c.bbox.min_x, x);
            c.bbox.max_x = std::max(c.bbox.max_x, x);
            c.bbox.max_y = std::max(c.bbox.max_y, y);
            sx[std::size_t(s)] += x;
            sy[std::size_t(s)] += y;
        }
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k].centroid_x = sx[k] / double(out[k].area);
        out[k].centroid_y = sy[k] / double(out[k].area);
    }
    return out;
}

SoftMask gaussian_blur(const BinaryMask& m, double sigma) {
    if (sigma < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "blur sigma must be >= 0");
    }
    if (sigma == 0.0) {
        return to_soft(m);
    }
    std::vector<double> in(m.bits().size()), out(m.bits().size());
    std::transform(m.bits().begin(), m.bits().end(), in.begin(),
                   [](std::uint8_t b) { return b ? 1.0 : 0.0; });
    kernels::omp::gaussian_blur(in, out, m.extent(), sigma);
    return SoftMask(m.extent(), std::move(out));
}

} // namespace cgvd
