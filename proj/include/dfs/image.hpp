#pragma once

#include <string>
#include <vector>

namespace dfs::render {

// Row-major, top-to-bottom image; 1 channel (silhouette/depth) or 3 (RGB),
// channel-interleaved, samples in [0,1] (silhouettes strictly {0,1}).
struct Image {
    int width = 0, height = 0, channels = 1;
    std::vector<float> data;

    Image() = default;
    Image(int w, int h, int c);

    float& at(int x, int y, int c = 0) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
    float at(int x, int y, int c = 0) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
};

// Mean squared sample difference; images must have identical layout.
double image_mse(const Image& a, const Image& b);

// 8-bit binary PGM (P5) / PPM (P6). Samples are clamped to [0,1] and scaled
// by 255 with round-to-nearest; written in the Image sample order.
void write_pgm(const Image& img, const std::string& path);
void write_ppm(const Image& img, const std::string& path);
Image read_pnm(const std::string& path);

}  // namespace dfs::render
