#include "dfs/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dfs::nn {

const char* layer_name(LayerKind k) {
    switch (k) {
        case LayerKind::Dense: return "dense";
        case LayerKind::Conv2d: return "conv2d";
        case LayerKind::Relu: return "relu";
        case LayerKind::MaxPool2d: return "max-pool2d";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::ConcatAux: return "concat-aux";
    }
    return "?";
}

namespace {

[[noreturn]] void layer_error(std::size_t idx, LayerKind kind, const std::string& msg) {
    throw std::invalid_argument("layer " + std::to_string(idx) + " (" + layer_name(kind) + "): " + msg);
}

}  // namespace

NetBuilder::NetBuilder(std::vector<int> input_shape, int aux_dim) {
    TensorT<float>::numel_of(input_shape);  // validates dims
    if (aux_dim < 0) throw std::invalid_argument("aux_dim must be >= 0");
    net_.shapes.push_back(std::move(input_shape));
    net_.aux_dim = aux_dim;
}

NetBuilder& NetBuilder::conv2d(int out_channels, int kernel, int stride) {
    const auto& in = net_.shapes.back();
    std::size_t idx = net_.layers.size();
    if (in.size() != 3) layer_error(idx, LayerKind::Conv2d, "expects (C,H,W) input, got " + shape_str(in));
    if (out_channels < 1 || kernel < 1 || stride < 1) layer_error(idx, LayerKind::Conv2d, "bad config");
    if (in[1] < kernel || in[2] < kernel)
        layer_error(idx, LayerKind::Conv2d, "kernel larger than input " + shape_str(in));
    net_.layers.push_back({LayerKind::Conv2d, 0, out_channels, kernel, stride});
    net_.shapes.push_back({out_channels, (in[1] - kernel) / stride + 1, (in[2] - kernel) / stride + 1});
    return *this;
}

NetBuilder& NetBuilder::relu() {
    net_.layers.push_back({LayerKind::Relu});
    net_.shapes.push_back(net_.shapes.back());
    return *this;
}

NetBuilder& NetBuilder::maxpool2d() {
    const auto& in = net_.shapes.back();
    std::size_t idx = net_.layers.size();
    if (in.size() != 3 || in[1] < 2 || in[2] < 2)
        layer_error(idx, LayerKind::MaxPool2d, "expects (C,H>=2,W>=2), got " + shape_str(in));
    net_.layers.push_back({LayerKind::MaxPool2d});
    net_.shapes.push_back({in[0], in[1] / 2, in[2] / 2});
    return *this;
}

NetBuilder& NetBuilder::flatten() {
    const auto& in = net_.shapes.back();
    net_.layers.push_back({LayerKind::Flatten});
    net_.shapes.push_back({static_cast<int>(TensorT<float>::numel_of(in))});
    return *this;
}

NetBuilder& NetBuilder::concat_aux() {
    const auto& in = net_.shapes.back();
    std::size_t idx = net_.layers.size();
    if (in.size() != 1) layer_error(idx, LayerKind::ConcatAux, "expects flat input, got " + shape_str(in));
    if (net_.aux_dim <= 0) layer_error(idx, LayerKind::ConcatAux, "network has no auxiliary input");
    for (const auto& l : net_.layers)
        if (l.kind == LayerKind::ConcatAux) layer_error(idx, LayerKind::ConcatAux, "duplicate injection point");
    net_.layers.push_back({LayerKind::ConcatAux});
    net_.shapes.push_back({in[0] + net_.aux_dim});
    return *this;
}

NetBuilder& NetBuilder::dense(int out_features) {
    const auto& in = net_.shapes.back();
    std::size_t idx = net_.layers.size();
    if (in.size() != 1) layer_error(idx, LayerKind::Dense, "expects flat input, got " + shape_str(in));
    if (out_features < 1) layer_error(idx, LayerKind::Dense, "bad out_features");
    net_.layers.push_back({LayerKind::Dense, out_features});
    net_.shapes.push_back({out_features});
    return *this;
}

Network NetBuilder::build() const {
    Network net = net_;
    net.weights.resize(net.layers.size());
    net.biases.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& l = net.layers[i];
        const auto& in = net.shapes[i];
        if (l.kind == LayerKind::Dense) {
            net.weights[i] = Tensor({l.out_features, in[0]});
            net.biases[i] = Tensor({l.out_features});
        } else if (l.kind == LayerKind::Conv2d) {
            net.weights[i] = Tensor({l.out_channels, in[0], l.kernel, l.kernel});
            net.biases[i] = Tensor({l.out_channels});
        }
    }
    return net;
}

void init_weights(Network& net, Rng& rng, bool zero_final_dense) {
    std::size_t last_dense = net.layers.size();
    for (std::size_t i = 0; i < net.layers.size(); ++i)
        if (net.layers[i].kind == LayerKind::Dense) last_dense = i;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& l = net.layers[i];
        if (l.kind != LayerKind::Dense && l.kind != LayerKind::Conv2d) continue;
        std::fill(net.biases[i].data.begin(), net.biases[i].data.end(), 0.0f);
        if (zero_final_dense && i == last_dense) {
            std::fill(net.weights[i].data.begin(), net.weights[i].data.end(), 0.0f);
            continue;
        }
        int fan_in, fan_out;
        if (l.kind == LayerKind::Dense) {
            fan_in = net.shapes[i][0];
            fan_out = l.out_features;
        } else {
            fan_in = net.shapes[i][0] * l.kernel * l.kernel;
            fan_out = l.out_channels * l.kernel * l.kernel;
        }
        double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (auto& w : net.weights[i].data) w = static_cast<float>(rng.uniform(-bound, bound));
    }
}

std::size_t param_count(const Network& net) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < net.layers.size(); ++i) n += net.weights[i].data.size() + net.biases[i].data.size();
    return n;
}

template <typename T>
void Gradients<T>::add_scaled(const Gradients<T>& other, T scale) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
        for (std::size_t j = 0; j < weights[i].data.size(); ++j) weights[i].data[j] += scale * other.weights[i].data[j];
        for (std::size_t j = 0; j < biases[i].data.size(); ++j) biases[i].data[j] += scale * other.biases[i].data[j];
    }
}

namespace {

// Inner loops run over the contiguous output row so they vectorize.
template <typename T>
void conv2d_fwd(const LayerConfig& l, const std::vector<int>& in_shape, const TensorT<T>& in,
                const TensorT<T>& w, const TensorT<T>& b, TensorT<T>& out) {
    const int ic = in_shape[0], h = in_shape[1], wd = in_shape[2];
    const int oc = l.out_channels, k = l.kernel, s = l.stride;
    const int oh = (h - k) / s + 1, ow = (wd - k) / s + 1;
    const T* src = in.data.data();
    const T* wt = w.data.data();
    T* dst = out.data.data();
    for (int o = 0; o < oc; ++o) {
        T* plane = dst + static_cast<std::size_t>(o) * oh * ow;
        std::fill(plane, plane + static_cast<std::size_t>(oh) * ow, b.data[o]);
        for (int c = 0; c < ic; ++c) {
            const T* splane = src + static_cast<std::size_t>(c) * h * wd;
            const T* wbase = wt + (static_cast<std::size_t>(o) * ic + c) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const T wv = wbase[ky * k + kx];
                    for (int oy = 0; oy < oh; ++oy) {
                        const T* sp = splane + (oy * s + ky) * wd + kx;
                        T* op = plane + static_cast<std::size_t>(oy) * ow;
                        if (s == 1) {
                            for (int ox = 0; ox < ow; ++ox) op[ox] += wv * sp[ox];
                        } else {
                            for (int ox = 0; ox < ow; ++ox) op[ox] += wv * sp[ox * s];
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void conv2d_bwd(const LayerConfig& l, const std::vector<int>& in_shape, const TensorT<T>& in,
                const TensorT<T>& w, const TensorT<T>& up, TensorT<T>& dw, TensorT<T>& db, TensorT<T>& din) {
    const int ic = in_shape[0], h = in_shape[1], wd = in_shape[2];
    const int oc = l.out_channels, k = l.kernel, s = l.stride;
    const int oh = (h - k) / s + 1, ow = (wd - k) / s + 1;
    for (int o = 0; o < oc; ++o) {
        const T* gplane = up.data.data() + static_cast<std::size_t>(o) * oh * ow;
        T gsum = 0;
        for (int i = 0; i < oh * ow; ++i) gsum += gplane[i];
        db.data[o] += gsum;
        for (int c = 0; c < ic; ++c) {
            const T* splane = in.data.data() + static_cast<std::size_t>(c) * h * wd;
            T* dplane = din.data.data() + static_cast<std::size_t>(c) * h * wd;
            const T* wbase = w.data.data() + (static_cast<std::size_t>(o) * ic + c) * k * k;
            T* dwbase = dw.data.data() + (static_cast<std::size_t>(o) * ic + c) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    const T wv = wbase[ky * k + kx];
                    T dwv = 0;
                    for (int oy = 0; oy < oh; ++oy) {
                        const T* gp = gplane + static_cast<std::size_t>(oy) * ow;
                        const T* sp = splane + (oy * s + ky) * wd + kx;
                        T* dp = dplane + (oy * s + ky) * wd + kx;
                        if (s == 1) {
                            for (int ox = 0; ox < ow; ++ox) {
                                dwv += gp[ox] * sp[ox];
                                dp[ox] += gp[ox] * wv;
                            }
                        } else {
                            for (int ox = 0; ox < ow; ++ox) {
                                dwv += gp[ox] * sp[ox * s];
                                dp[ox * s] += gp[ox] * wv;
                            }
                        }
                    }
                    dwbase[ky * k + kx] += dwv;
                }
            }
        }
    }
}

template <typename T>
void maxpool_fwd(const std::vector<int>& in_shape, const TensorT<T>& in, TensorT<T>& out) {
    const int c = in_shape[0], h = in_shape[1], w = in_shape[2];
    const int oh = h / 2, ow = w / 2;
    for (int ch = 0; ch < c; ++ch)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                const T* base = in.data.data() + (ch * h + oy * 2) * w + ox * 2;
                T m = base[0];
                m = std::max(m, base[1]);
                m = std::max(m, base[w]);
                m = std::max(m, base[w + 1]);
                out.data[(ch * oh + oy) * ow + ox] = m;
            }
}

// Gradient goes to the first maximum in scan order (y then x).
template <typename T>
void maxpool_bwd(const std::vector<int>& in_shape, const TensorT<T>& in, const TensorT<T>& up, TensorT<T>& din) {
    const int c = in_shape[0], h = in_shape[1], w = in_shape[2];
    const int oh = h / 2, ow = w / 2;
    for (int ch = 0; ch < c; ++ch)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                std::size_t base = (static_cast<std::size_t>(ch) * h + oy * 2) * w + ox * 2;
                std::size_t offs[4] = {base, base + 1, base + w, base + w + 1};
                std::size_t best = offs[0];
                for (int i = 1; i < 4; ++i)
                    if (in.data[offs[i]] > in.data[best]) best = offs[i];
                din.data[best] += up.data[(ch * oh + oy) * ow + ox];
            }
}

template <typename T>
void dense_fwd(const TensorT<T>& in, const TensorT<T>& w, const TensorT<T>& b, TensorT<T>& out) {
    const int m = w.shape[0], n = w.shape[1];
    for (int i = 0; i < m; ++i) {
        T acc = b.data[i];
        const T* wr = w.data.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) acc += wr[j] * in.data[j];
        out.data[i] = acc;
    }
}

template <typename T>
void dense_bwd(const TensorT<T>& in, const TensorT<T>& w, const TensorT<T>& up, TensorT<T>& dw, TensorT<T>& db,
               TensorT<T>& din) {
    const int m = w.shape[0], n = w.shape[1];
    for (int i = 0; i < m; ++i) {
        T g = up.data[i];
        db.data[i] += g;
        T* dwr = dw.data.data() + static_cast<std::size_t>(i) * n;
        const T* wr = w.data.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            dwr[j] += g * in.data[j];
            din.data[j] += g * wr[j];
        }
    }
}

}  // namespace

template <typename T>
TensorT<T> forward(const NetworkT<T>& net, const TensorT<T>& input, const TensorT<T>& aux, ForwardCache<T>* cache) {
    if (input.shape != net.shapes[0])
        throw std::invalid_argument("forward: input shape " + shape_str(input.shape) + " does not match network input " +
                                    shape_str(net.shapes[0]));
    int aux_n = aux.shape.empty() ? 0 : aux.shape[0];
    if (aux_n != net.aux_dim)
        throw std::invalid_argument("forward: auxiliary input has " + std::to_string(aux_n) + " values, network expects " +
                                    std::to_string(net.aux_dim));

    ForwardCache<T> local;
    ForwardCache<T>& c = cache ? *cache : local;
    c.acts.clear();
    c.acts.reserve(net.layers.size() + 1);
    c.acts.push_back(input);
    c.aux = aux;

    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& l = net.layers[i];
        const auto& in = c.acts.back();
        TensorT<T> out(net.shapes[i + 1]);
        switch (l.kind) {
            case LayerKind::Conv2d:
                conv2d_fwd(l, net.shapes[i], in, net.weights[i], net.biases[i], out);
                break;
            case LayerKind::Relu:
                for (std::size_t j = 0; j < in.data.size(); ++j) out.data[j] = in.data[j] > T(0) ? in.data[j] : T(0);
                break;
            case LayerKind::MaxPool2d:
                maxpool_fwd(net.shapes[i], in, out);
                break;
            case LayerKind::Flatten:
                out.data = in.data;
                break;
            case LayerKind::ConcatAux: {
                std::copy(in.data.begin(), in.data.end(), out.data.begin());
                std::copy(c.aux.data.begin(), c.aux.data.end(), out.data.begin() + in.data.size());
                break;
            }
            case LayerKind::Dense:
                dense_fwd(in, net.weights[i], net.biases[i], out);
                break;
        }
        c.acts.push_back(std::move(out));
    }
    return c.acts.back();
}

template <typename T>
Gradients<T> backward(const NetworkT<T>& net, const ForwardCache<T>& cache, const TensorT<T>& upstream) {
    if (cache.acts.size() != net.layers.size() + 1)
        throw std::logic_error("backward: no forward cache (call forward first)");
    if (upstream.shape != net.shapes.back())
        throw std::invalid_argument("backward: upstream shape " + shape_str(upstream.shape) +
                                    " does not match output " + shape_str(net.shapes.back()));

    Gradients<T> g;
    g.weights.resize(net.layers.size());
    g.biases.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (!net.weights[i].shape.empty()) g.weights[i] = TensorT<T>(net.weights[i].shape);
        if (!net.biases[i].shape.empty()) g.biases[i] = TensorT<T>(net.biases[i].shape);
    }

    TensorT<T> up = upstream;
    for (std::size_t ii = net.layers.size(); ii-- > 0;) {
        const auto& l = net.layers[ii];
        const auto& in = cache.acts[ii];
        TensorT<T> din(net.shapes[ii]);
        switch (l.kind) {
            case LayerKind::Conv2d:
                conv2d_bwd(l, net.shapes[ii], in, net.weights[ii], up, g.weights[ii], g.biases[ii], din);
                break;
            case LayerKind::Relu:
                for (std::size_t j = 0; j < in.data.size(); ++j) din.data[j] = in.data[j] > T(0) ? up.data[j] : T(0);
                break;
            case LayerKind::MaxPool2d:
                maxpool_bwd(net.shapes[ii], in, up, din);
                break;
            case LayerKind::Flatten:
                din.data = up.data;
                break;
            case LayerKind::ConcatAux: {
                std::copy(up.data.begin(), up.data.begin() + din.data.size(), din.data.begin());
                g.aux = TensorT<T>({net.aux_dim});
                std::copy(up.data.begin() + din.data.size(), up.data.end(), g.aux.data.begin());
                break;
            }
            case LayerKind::Dense:
                dense_bwd(in, net.weights[ii], up, g.weights[ii], g.biases[ii], din);
                break;
        }
        up = std::move(din);
    }
    g.input = std::move(up);
    if (net.aux_dim > 0 && g.aux.shape.empty()) g.aux = TensorT<T>({net.aux_dim});
    return g;
}

template <typename T>
LossResult<T> mse_loss(const TensorT<T>& pred, const TensorT<T>& target) {
    if (pred.shape != target.shape)
        throw std::invalid_argument("mse_loss: shape mismatch " + shape_str(pred.shape) + " vs " +
                                    shape_str(target.shape));
    LossResult<T> r;
    r.grad = TensorT<T>(pred.shape);
    T sum = 0;
    const T inv_n = T(1) / static_cast<T>(pred.numel());
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        T d = pred.data[i] - target.data[i];
        sum += d * d;
        r.grad.data[i] = T(2) * d * inv_n;
    }
    r.value = sum * inv_n;
    return r;
}

AdamState AdamState::make(const Network& net, AdamConfig cfg) {
    AdamState s;
    s.cfg = cfg;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        s.m_w.push_back(net.weights[i].shape.empty() ? Tensor{} : Tensor(net.weights[i].shape));
        s.v_w.push_back(net.weights[i].shape.empty() ? Tensor{} : Tensor(net.weights[i].shape));
        s.m_b.push_back(net.biases[i].shape.empty() ? Tensor{} : Tensor(net.biases[i].shape));
        s.v_b.push_back(net.biases[i].shape.empty() ? Tensor{} : Tensor(net.biases[i].shape));
    }
    return s;
}

namespace {

void adam_update(const AdamConfig& cfg, double bc1, double bc2, Tensor& param, const Tensor& grad, Tensor& m,
                 Tensor& v, std::size_t layer, const char* what) {
    for (std::size_t j = 0; j < grad.data.size(); ++j) {
        if (!std::isfinite(grad.data[j]))
            throw std::runtime_error("adam_step: non-finite gradient in layer " + std::to_string(layer) + " " + what);
        float g = grad.data[j];
        m.data[j] = cfg.beta1 * m.data[j] + (1.0f - cfg.beta1) * g;
        v.data[j] = cfg.beta2 * v.data[j] + (1.0f - cfg.beta2) * g * g;
        float mhat = static_cast<float>(m.data[j] / bc1);
        float vhat = static_cast<float>(v.data[j] / bc2);
        param.data[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

}  // namespace

void adam_step(AdamState& state, Network& net, const Gradients<float>& grads) {
    state.step += 1;
    double bc1 = 1.0 - std::pow(static_cast<double>(state.cfg.beta1), static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(static_cast<double>(state.cfg.beta2), static_cast<double>(state.step));
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (net.weights[i].shape.empty()) continue;
        if (grads.weights[i].shape != net.weights[i].shape || grads.biases[i].shape != net.biases[i].shape)
            throw std::invalid_argument("adam_step: gradient shapes do not match parameters at layer " +
                                        std::to_string(i));
        adam_update(state.cfg, bc1, bc2, net.weights[i], grads.weights[i], state.m_w[i], state.v_w[i], i, "weights");
        adam_update(state.cfg, bc1, bc2, net.biases[i], grads.biases[i], state.m_b[i], state.v_b[i], i, "biases");
    }
}

template TensorT<float> forward(const NetworkT<float>&, const TensorT<float>&, const TensorT<float>&,
                                ForwardCache<float>*);
template TensorT<double> forward(const NetworkT<double>&, const TensorT<double>&, const TensorT<double>&,
                                 ForwardCache<double>*);
template Gradients<float> backward(const NetworkT<float>&, const ForwardCache<float>&, const TensorT<float>&);
template Gradients<double> backward(const NetworkT<double>&, const ForwardCache<double>&, const TensorT<double>&);
template LossResult<float> mse_loss(const TensorT<float>&, const TensorT<float>&);
template LossResult<double> mse_loss(const TensorT<double>&, const TensorT<double>&);
template struct Gradients<float>;
template struct Gradients<double>;

}  // namespace dfs::nn
