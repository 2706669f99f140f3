#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cvdcm/dataset_io.hpp"
#include "cvdcm/types.hpp"

namespace cvdcm {

// RGB image with pixels normalized to [0,1]. Values are quantized to 8-bit
// steps (k/255) so a PNG round trip is lossless.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<float> pixels;  // row-major H x W x 3
    std::string image_id;
    int month = kDecember;
    std::optional<double> density;
    std::optional<SceneFractions> ground_truth;

    float at(int y, int x, int c) const { return pixels[(y * width + x) * 3 + c]; }
    float& at(int y, int x, int c) { return pixels[(y * width + x) * 3 + c]; }
};

Image hflip(const Image& img);

// Bilinear resample to (height, width); identity when the size already matches.
Image resize(const Image& img, int height, int width);

void write_png_rgb8(const Image& img, const std::string& path);
Image read_png_rgb8(const std::string& path);

// read_png_rgb8 plus the manifest metadata attached
Image load_image(const ImageManifest& manifest, const ImageMeta& meta);

}  // namespace cvdcm
