#include "regionedit/cli/io_image.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "regionedit/errors.hpp"
#include "regionedit/image_ops.hpp"

namespace regionedit::cli {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

ImageBuffer from_rgb8(const std::vector<std::uint8_t>& rgb, Index height, Index width) {
    ImageBuffer img(height, width);
    for (Index y = 0; y < height; ++y)
        for (Index x = 0; x < width; ++x) {
            const std::size_t base = 3 * static_cast<std::size_t>(y * width + x);
            for (int c = 0; c < 3; ++c)
                img.plane[c](y, x) = from_8bit(rgb[base + static_cast<std::size_t>(c)]);
        }
    return img;
}

ImageBuffer load_png_file(std::FILE* fp, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                             nullptr);
    if (!png) throw IoError("png: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png: allocation failure");
    }
    // longjmp target: libpng jumps back here on any decode error. All
    // buffers live in vectors declared before I/O starts so nothing leaks.
    std::vector<std::uint8_t> rgb;
    std::vector<png_bytep> rows;
    Index height = 0, width = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("png: failed to decode " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    width = static_cast<Index>(png_get_image_width(png, info));
    height = static_cast<Index>(png_get_image_height(png, info));
    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    rgb.resize(3 * static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
    rows.resize(static_cast<std::size_t>(height));
    for (Index y = 0; y < height; ++y)
        rows[static_cast<std::size_t>(y)] =
            rgb.data() + 3 * static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return from_rgb8(rgb, height, width);
}

ImageBuffer load_jpeg_file(std::FILE* fp, const std::string& path) {
    jpeg_decompress_struct cinfo;
    jpeg_error_mgr jerr;
    cinfo.err = jpeg_std_error(&jerr);
    // libjpeg's default error handler exits the process; route it into an
    // exception instead.
    struct JumpState {
        std::jmp_buf env;
    } jump;
    jerr.error_exit = [](j_common_ptr c) {
        std::longjmp(static_cast<JumpState*>(c->client_data)->env, 1);
    };
    cinfo.client_data = &jump;
    std::vector<std::uint8_t> rgb;
    Index height = 0, width = 0;
    if (setjmp(jump.env)) {
        jpeg_destroy_decompress(&cinfo);
        throw IoError("jpeg: failed to decode " + path);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    width = static_cast<Index>(cinfo.output_width);
    height = static_cast<Index>(cinfo.output_height);
    rgb.resize(3 * static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
    while (cinfo.output_scanline < cinfo.output_height) {
        std::uint8_t* row = rgb.data() + 3 * static_cast<std::size_t>(cinfo.output_scanline) *
                                             static_cast<std::size_t>(width);
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return from_rgb8(rgb, height, width);
}

}  // namespace

ImageBuffer load_image(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open: " + path);
    std::uint8_t magic[8] = {};
    const std::size_t got = std::fread(magic, 1, sizeof(magic), fp.get());
    std::rewind(fp.get());
    static const std::uint8_t png_sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (got >= 8 && std::memcmp(magic, png_sig, 8) == 0)
        return load_png_file(fp.get(), path);
    if (got >= 2 && magic[0] == 0xFF && magic[1] == 0xD8)
        return load_jpeg_file(fp.get(), path);
    throw IoError("unsupported image format (expected PNG or JPEG): " + path);
}

void save_png(const std::string& path, const ImageBuffer& image) {
    validate_image(image);
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                              nullptr);
    if (!png) throw IoError("png: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png: allocation failure");
    }
    const Index height = image.height();
    const Index width = image.width();
    std::vector<std::uint8_t> rgb(3 * static_cast<std::size_t>(height) *
                                  static_cast<std::size_t>(width));
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (Index y = 0; y < height; ++y) {
        for (Index x = 0; x < width; ++x) {
            const std::size_t base = 3 * static_cast<std::size_t>(y * width + x);
            for (int c = 0; c < 3; ++c)
                rgb[base + static_cast<std::size_t>(c)] = to_8bit(image.plane[c](y, x));
        }
        rows[static_cast<std::size_t>(y)] =
            rgb.data() + 3 * static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png: failed to encode " + path);
    }
    png_init_io(png, fp.get());
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace regionedit::cli
