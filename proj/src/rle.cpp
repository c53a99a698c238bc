#include "cgvd/rle.hpp"

#include "cgvd/error.hpp"

#include <fstream>

namespace cgvd {

Rle encode_rle(const BinaryMask& m) {
    Rle rle;
    rle.height = m.height();
    rle.width = m.width();
    bool current = false;
    std::int64_t run = 0;
    for (int x = 0; x < m.width(); ++x) {
        for (int y = 0; y < m.height(); ++y) {
            const bool v = m.get(x, y);
            if (v != current) {
                rle.counts.push_back(run);
                run = 0;
                current = v;
            }
            ++run;
        }
    }
    rle.counts.push_back(run);
    return rle;
}

BinaryMask decode_rle(const Rle& rle) {
    if (rle.height < 0 || rle.width < 0) {
        throw Error(ErrorCode::ProtocolError, "rle: negative size");
    }
    BinaryMask m({rle.width, rle.height});
    const std::int64_t total = std::int64_t(rle.width) * rle.height;
    std::int64_t pos = 0;
    bool value = false;
    for (std::int64_t run : rle.counts) {
        if (run < 0 || pos + run > total) {
            throw Error(ErrorCode::ProtocolError, "rle: counts exceed mask size");
        }
        if (value) {
            for (std::int64_t k = pos; k < pos + run; ++k) {
                m.set(int(k / rle.height), int(k % rle.height));
            }
        }
        pos += run;
        value = !value;
    }
    if (pos != total) {
        throw Error(ErrorCode::ProtocolError, "rle: counts do not cover mask");
    }
    return m;
}

nlohmann::json to_json(const Rle& rle) {
    return {{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

Rle rle_from_json(const nlohmann::json& j) {
    try {
        Rle rle;
        const auto& size = j.at("size");
        if (!size.is_array() || size.size() != 2) {
            throw Error(ErrorCode::ProtocolError, "rle: size must be [H, W]");
        }
        rle.height = size.at(0).get<int>();
        rle.width = size.at(1).get<int>();
        rle.counts = j.at("counts").get<std::vector<std::int64_t>>();
        return rle;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ProtocolError, std::string("rle: ") + e.what());
    }
}

nlohmann::json mask_to_json(const BinaryMask& m) { return to_json(encode_rle(m)); }

BinaryMask mask_from_json(const nlohmann::json& j) { return decode_rle(rle_from_json(j)); }

void write_mask(const std::filesystem::path& path, const BinaryMask& m) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    out << mask_to_json(m).dump() << '\n';
}

BinaryMask read_mask(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    try {
        return mask_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ProtocolError, path.string() + ": " + e.what());
    }
}

} // namespace cgvd
