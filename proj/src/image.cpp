#include "dfs/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace dfs::render {

Image::Image(int w, int h, int c) : width(w), height(h), channels(c) {
    if (w < 1 || h < 1 || (c != 1 && c != 3)) throw std::invalid_argument("image: bad dimensions");
    data.assign(static_cast<std::size_t>(w) * h * c, 0.0f);
}

double image_mse(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels)
        throw std::invalid_argument("image_mse: dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(a.data.size());
}

namespace {

void write_pnm(const Image& img, const std::string& path, int want_channels, const char* magic) {
    if (img.channels != want_channels)
        throw std::invalid_argument(std::string("image: ") + magic + " requires " + std::to_string(want_channels) +
                                    " channel(s)");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << magic << "\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> row(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        float v = std::clamp(img.data[i], 0.0f, 1.0f);
        row[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!f) throw std::runtime_error("short write to " + path);
}

}  // namespace

void write_pgm(const Image& img, const std::string& path) { write_pnm(img, path, 1, "P5"); }
void write_ppm(const Image& img, const std::string& path) { write_pnm(img, path, 3, "P6"); }

Image read_pnm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string magic;
    f >> magic;
    if (magic != "P5" && magic != "P6") throw std::runtime_error(path + ": not a binary PGM/PPM file");
    int w, h, maxval;
    f >> w >> h >> maxval;
    if (!f || w < 1 || h < 1 || maxval != 255) throw std::runtime_error(path + ": bad PNM header");
    f.get();  // single whitespace after header
    Image img(w, h, magic == "P5" ? 1 : 3);
    std::vector<unsigned char> raw(img.data.size());
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!f) throw std::runtime_error(path + ": truncated pixel data");
    for (std::size_t i = 0; i < raw.size(); ++i) img.data[i] = static_cast<float>(raw[i]) / 255.0f;
    return img;
}

}  // namespace dfs::render
