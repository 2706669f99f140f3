#include "cvdcm/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include <png.h>

namespace cvdcm {

Image hflip(const Image& img) {
    Image out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
    return out;
}

Image resize(const Image& img, int height, int width) {
    if (height == img.height && width == img.width) return img;
    if (height <= 0 || width <= 0) throw std::invalid_argument("resize: non-positive size");
    Image out = img;
    out.height = height;
    out.width = width;
    out.pixels.assign(static_cast<std::size_t>(height) * width * 3, 0.0f);
    const double sy = static_cast<double>(img.height) / height;
    const double sx = static_cast<double>(img.width) / width;
    for (int y = 0; y < height; ++y) {
        const double fy = std::max(0.0, (y + 0.5) * sy - 0.5);
        const int y0 = std::min(static_cast<int>(fy), img.height - 1);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::max(0.0, (x + 0.5) * sx - 0.5);
            const int x0 = std::min(static_cast<int>(fx), img.width - 1);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = (1.0 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c);
                const double bot = (1.0 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c);
                out.at(y, x, c) = static_cast<float>((1.0 - wy) * top + wy * bot);
            }
        }
    }
    return out;
}

void write_png_rgb8(const Image& img, const std::string& path) {
    if (img.height <= 0 || img.width <= 0)
        throw std::invalid_argument("write_png_rgb8: empty image");
    std::vector<png_byte> bytes(static_cast<std::size_t>(img.height) * img.width * 3);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const float v = std::clamp(img.pixels[i], 0.0f, 1.0f);
        bytes[i] = static_cast<png_byte>(std::lround(v * 255.0f));
    }
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width);
    png.height = static_cast<png_uint_32>(img.height);
    png.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, path.c_str(), 0, bytes.data(),
                                 static_cast<png_int_32>(img.width * 3), nullptr)) {
        throw std::runtime_error("PNG write failed: " + path + ": " + png.message);
    }
}

Image read_png_rgb8(const std::string& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str()))
        throw std::runtime_error("PNG read failed: " + path + ": " + png.message);
    png.format = PNG_FORMAT_RGB;
    std::vector<png_byte> bytes(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, bytes.data(), 0, nullptr)) {
        png_image_free(&png);
        throw std::runtime_error("PNG read failed: " + path + ": " + png.message);
    }
    Image img;
    img.height = static_cast<int>(png.height);
    img.width = static_cast<int>(png.width);
    img.pixels.resize(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i)
        img.pixels[i] = static_cast<float>(bytes[i]) / 255.0f;
    return img;
}

Image load_image(const ImageManifest& manifest, const ImageMeta& meta) {
    Image img = read_png_rgb8(manifest.resolve_path(meta));
    img.image_id = meta.image_id;
    img.month = meta.month;
    img.density = meta.density;
    img.ground_truth = meta.ground_truth;
    return img;
}

}  // namespace cvdcm
