#pragma once

// COCO-style uncompressed RLE: column-major run lengths, starting with the
// run of zeros. JSON form: {"size": [H, W], "counts": [...]}.

#include "cgvd/mask.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace cgvd {

struct Rle {
    int height = 0;
    int width = 0;
    std::vector<std::int64_t> counts;
    bool operator==(const Rle&) const = default;
};

Rle encode_rle(const BinaryMask& m);
// Throws ProtocolError on counts that do not sum to H*W or contain negatives.
BinaryMask decode_rle(const Rle& rle);

nlohmann::json to_json(const Rle& rle);
Rle rle_from_json(const nlohmann::json& j);

nlohmann::json mask_to_json(const BinaryMask& m);
BinaryMask mask_from_json(const nlohmann::json& j);

void write_mask(const std::filesystem::path& path, const BinaryMask& m);
BinaryMask read_mask(const std::filesystem::path& path);

} // namespace cgvd
