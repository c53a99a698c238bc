#include "cgvd/image.hpp"

#include "cgvd/error.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <csetjmp>

namespace cgvd {

std::string to_string(Extent e) {
    return std::to_string(e.width) + "x" + std::to_string(e.height);
}

void require_same_extent(Extent a, Extent b, const char* what) {
    if (a != b) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + ": " + to_string(a) + " vs " + to_string(b));
    }
}

Image::Image(Extent extent, Rgb fill) : extent_(extent) {
    if (extent.width < 0 || extent.height < 0) {
        throw Error(ErrorCode::InvalidConfig, "negative image extent");
    }
    data_.resize(std::size_t(extent.area()) * 3);
    for (std::size_t i = 0; i < data_.size(); i += 3) {
        data_[i] = fill.r;
        data_[i + 1] = fill.g;
        data_[i + 2] = fill.b;
    }
}

namespace {

struct ReadCursor {
    const std::uint8_t* bytes;
    std::size_t size;
    std::size_t offset;
};

void png_read_cb(png_structp png, png_bytep out, png_size_t n) {
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->offset + n > cur->size) {
        png_error(png, "truncated PNG stream");
    }
    std::memcpy(out, cur->bytes + cur->offset, n);
    cur->offset += n;
}

void png_write_cb(png_structp png, png_bytep in, png_size_t n) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), in, in + n);
}

void png_flush_cb(png_structp) {}

void png_warning_cb(png_structp, png_const_charp) {}

// libpng reports errors by longjmp; these helpers keep only trivially
// destructible locals between setjmp and the libpng calls.
bool write_rows(png_structp png, png_infop info, const std::uint8_t* rgb, int w, int h) {
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    png_set_IHDR(png, info, png_uint_32(w), png_uint_32(h), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < h; ++y) {
        png_write_row(png, rgb + std::size_t(y) * w * 3);
    }
    png_write_end(png, nullptr);
    return true;
}

bool read_header(png_structp png, png_infop info, int* w, int* h) {
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    *w = int(png_get_image_width(png, info));
    *h = int(png_get_image_height(png, info));
    return png_get_rowbytes(png, info) == png_size_t(*w) * 3;
}

bool read_rows(png_structp png, std::uint8_t* rgb, int w, int h) {
    if (setjmp(png_jmpbuf(png))) {
        return false;
    }
    for (int y = 0; y < h; ++y) {
        png_read_row(png, rgb + std::size_t(y) * w * 3, nullptr);
    }
    return true;
}

} // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
    if (image.empty()) {
        throw Error(ErrorCode::InvalidConfig, "cannot encode an empty image");
    }
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_cb);
    png_infop info = png_create_info_struct(png);
    std::vector<std::uint8_t> out;
    png_set_write_fn(png, &out, png_write_cb, png_flush_cb);
    const bool ok = write_rows(png, info, image.data().data(), image.width(), image.height());
    png_destroy_write_struct(&png, &info);
    if (!ok) {
        throw Error(ErrorCode::IoError, "png encode failed");
    }
    return out;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        throw Error(ErrorCode::ProtocolError, "not a PNG stream");
    }
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_cb);
    png_infop info = png_create_info_struct(png);
    ReadCursor cursor{bytes.data(), bytes.size(), 0};
    png_set_read_fn(png, &cursor, png_read_cb);
    int w = 0, h = 0;
    bool ok = read_header(png, info, &w, &h) && w > 0 && h > 0;
    Image image;
    if (ok) {
        image = Image({w, h});
        ok = read_rows(png, image.data().data(), w, h);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    if (!ok) {
        throw Error(ErrorCode::ProtocolError, "malformed PNG stream");
    }
    return image;
}

Image read_png(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_png(bytes);
}

void write_png(const std::filesystem::path& path, const Image& image) {
    auto bytes = encode_png(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

} // namespace cgvd
