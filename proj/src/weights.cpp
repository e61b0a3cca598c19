#include "dfs/weights.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dfs::nn {

namespace {

constexpr char kMagic[4] = {'D', 'F', 'N', 'W'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void put_f32(std::vector<std::uint8_t>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

struct Reader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    std::uint32_t u32() {
        if (pos + 4 > bytes.size()) throw std::runtime_error("weights: truncated file");
        std::uint32_t v = bytes[pos] | (bytes[pos + 1] << 8) | (bytes[pos + 2] << 16) |
                          (static_cast<std::uint32_t>(bytes[pos + 3]) << 24);
        pos += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
};

std::vector<const Tensor*> param_tensors(const Network& net) {
    std::vector<const Tensor*> out;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (net.weights[i].shape.empty()) continue;
        out.push_back(&net.weights[i]);
        out.push_back(&net.biases[i]);
    }
    return out;
}

}  // namespace

std::vector<std::uint8_t> save_weights(const Network& net) {
    auto tensors = param_tensors(net);
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const Tensor* t : tensors) {
        put_u32(out, static_cast<std::uint32_t>(t->shape.size()));
        for (int d : t->shape) put_u32(out, static_cast<std::uint32_t>(d));
        for (float f : t->data) put_f32(out, f);
    }
    return out;
}

std::vector<Tensor> read_weights(const std::vector<std::uint8_t>& bytes) {
    Reader r{bytes};
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw std::runtime_error("weights: bad magic (not a DFNW file)");
    r.pos = 4;
    std::uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("weights: unsupported version " + std::to_string(version));
    std::uint32_t count = r.u32();
    std::vector<Tensor> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint32_t rank = r.u32();
        if (rank > 8) throw std::runtime_error("weights: implausible tensor rank");
        std::vector<int> shape(rank);
        std::size_t numel = 1;
        for (auto& d : shape) {
            d = static_cast<int>(r.u32());
            if (d <= 0) throw std::runtime_error("weights: non-positive dimension");
            numel *= static_cast<std::size_t>(d);
        }
        std::vector<float> data(numel);
        for (auto& f : data) f = r.f32();
        out.emplace_back(std::move(shape), std::move(data));
    }
    return out;
}

void load_weights(Network& net, const std::vector<std::uint8_t>& bytes) {
    auto tensors = read_weights(bytes);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (net.weights[i].shape.empty()) continue;
        for (Tensor* dst : {&net.weights[i], &net.biases[i]}) {
            if (idx >= tensors.size()) throw std::runtime_error("weights: file has fewer tensors than the network");
            if (tensors[idx].shape != dst->shape)
                throw std::runtime_error("weights: tensor " + std::to_string(idx) + " shape " +
                                         shape_str(tensors[idx].shape) + " does not match network " +
                                         shape_str(dst->shape));
            dst->data = std::move(tensors[idx].data);
            ++idx;
        }
    }
    if (idx != tensors.size()) throw std::runtime_error("weights: file has more tensors than the network");
}

void save_weights_file(const Network& net, const std::string& path) {
    auto bytes = save_weights(net);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("short write to " + path);
}

void load_weights_file(Network& net, const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    load_weights(net, bytes);
}

std::uint64_t weights_checksum(const Network& net) {
    auto bytes = save_weights(net);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace dfs::nn
