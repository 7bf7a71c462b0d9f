// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
#include "gscache/image_io.hpp"

#include "gscache/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace gscache {

namespace {

struct FileCloser {
    void operator()(std::FILE *f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path &path, const char *mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f)
        throw IoError("cannot open " + path.string());
    return f;
}

void write_rows(png_structp png, const Image &image) {
    std::vector<png_byte> row(static_cast<std::size_t>(image.width) * 3);
    for (int y = 0; y < image.height; ++y) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const float v = image.rgb[std::size_t(y) * row.size() + i];
            row[i] = static_cast<png_byte>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
        }
        png_write_row(png, row.data());
    }
}

void read_rows(png_structp png, png_infop info, Image &img) {
    std::vector<png_byte> row(png_get_rowbytes(png, info));
    for (int y = 0; y < img.height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int i = 0; i < 3 * img.width; ++i)
            img.rgb[std::size_t(y) * 3 * img.width + i] = row[static_cast<std::size_t>(i)] / 255.0f;
    }
}

} // namespace

void write_png(const Image &image, const std::filesystem::path &path) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng: out of memory");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng: failed writing " + path.string());
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    write_rows(png, image);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image read_png(const std::filesystem::path &path) {
    FilePtr f = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("libpng: out of memory");
    }
    Image img;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("libpng: failed reading " + path.string(), 0);
    }
    png_init_io(png, f.get());
    png_read_info(png, info);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_palette_to_rgb(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    img = Image(w, h);
    read_rows(png, info, img);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_raw(const Image &image, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path.string());
    const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
    std::vector<float> plane(n);
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < n; ++i)
            plane[i] = image.rgb[3 * i + c];
        out.write(reinterpret_cast<const char *>(plane.data()),
                  static_cast<std::streamsize>(n * sizeof(float)));
    }
    if (!out)
        throw IoError("failed writing " + path.string());
}

Image read_raw(const std::filesystem::path &path, int width, int height) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    Image img(width, height);
    const std::size_t n = static_cast<std::size_t>(width) * height;
    std::vector<float> plane(n);
    for (int c = 0; c < 3; ++c) {
        if (!in.read(reinterpret_cast<char *>(plane.data()),
                     static_cast<std::streamsize>(n * sizeof(float))))
            throw FormatError("raw image truncated: " + path.string(),
                              static_cast<std::size_t>(c) * n * sizeof(float));
        for (std::size_t i = 0; i < n; ++i)
            img.rgb[3 * i + c] = plane[i];
    }
    return img;
}

} // namespace gscache
