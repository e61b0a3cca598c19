#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dfs/rng.hpp"
#include "dfs/tensor.hpp"

namespace dfs::nn {

enum class LayerKind { Dense, Conv2d, Relu, MaxPool2d, Flatten, ConcatAux };

struct LayerConfig {
    LayerKind kind;
    int out_features = 0;  // dense
    int out_channels = 0;  // conv2d
    int kernel = 0;        // conv2d
    int stride = 1;        // conv2d; max-pool is fixed 2x2 stride 2
};

const char* layer_name(LayerKind k);

// Feed-forward network: a layer list plus an optional auxiliary vector that a
// ConcatAux layer splices into the activation stream (this is how the current
// estimate x^t joins the fully-connected tail).
template <typename T>
struct NetworkT {
    std::vector<LayerConfig> layers;
    std::vector<std::vector<int>> shapes;  // shapes[0] = input, shapes[i+1] = output of layer i
    std::vector<TensorT<T>> weights;       // empty tensor where a layer has none
    std::vector<TensorT<T>> biases;
    int aux_dim = 0;

    template <typename U>
    NetworkT<U> cast() const {
        NetworkT<U> out;
        out.layers = layers;
        out.shapes = shapes;
        out.aux_dim = aux_dim;
        for (const auto& w : weights) out.weights.push_back(w.template cast<U>());
        for (const auto& b : biases) out.biases.push_back(b.template cast<U>());
        return out;
    }
};

using Network = NetworkT<float>;

// Builder: shapes are resolved eagerly, so a bad layer stack fails at
// construction, not at the first forward call.
class NetBuilder {
  public:
    NetBuilder(std::vector<int> input_shape, int aux_dim = 0);
    NetBuilder& conv2d(int out_channels, int kernel, int stride = 1);
    NetBuilder& relu();
    NetBuilder& maxpool2d();
    NetBuilder& flatten();
    NetBuilder& concat_aux();
    NetBuilder& dense(int out_features);
    Network build() const;

  private:
    Network net_;
};

// Glorot-uniform weights, zero biases; the final dense layer is zeroed so an
// untrained update network predicts exactly no change.
void init_weights(Network& net, Rng& rng, bool zero_final_dense = true);

std::size_t param_count(const Network& net);

template <typename T>
struct ForwardCache {
    std::vector<TensorT<T>> acts;  // acts[0] = input, acts[i+1] = output of layer i
    TensorT<T> aux;
};

template <typename T>
struct Gradients {
    std::vector<TensorT<T>> weights;
    std::vector<TensorT<T>> biases;
    TensorT<T> input;
    TensorT<T> aux;

    void add_scaled(const Gradients<T>& other, T scale);
};

template <typename T>
TensorT<T> forward(const NetworkT<T>& net, const TensorT<T>& input, const TensorT<T>& aux,
                   ForwardCache<T>* cache = nullptr);

template <typename T>
TensorT<T> forward(const NetworkT<T>& net, const TensorT<T>& input, ForwardCache<T>* cache = nullptr) {
    return forward(net, input, TensorT<T>{}, cache);
}

template <typename T>
Gradients<T> backward(const NetworkT<T>& net, const ForwardCache<T>& cache, const TensorT<T>& upstream);

template <typename T>
struct LossResult {
    T value;
    TensorT<T> grad;
};

// Mean of squared differences; gradient 2(pred-target)/N.
template <typename T>
LossResult<T> mse_loss(const TensorT<T>& pred, const TensorT<T>& target);

struct AdamConfig {
    float lr = 1e-3f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

struct AdamState {
    AdamConfig cfg;
    std::vector<Tensor> m_w, v_w, m_b, v_b;
    std::int64_t step = 0;

    static AdamState make(const Network& net, AdamConfig cfg = {});
};

// Standard Adam with bias correction. Throws on non-finite gradients, naming
// the offending tensor.
void adam_step(AdamState& state, Network& net, const Gradients<float>& grads);

extern template TensorT<float> forward(const NetworkT<float>&, const TensorT<float>&, const TensorT<float>&,
                                       ForwardCache<float>*);
extern template TensorT<double> forward(const NetworkT<double>&, const TensorT<double>&, const TensorT<double>&,
                                        ForwardCache<double>*);
extern template Gradients<float> backward(const NetworkT<float>&, const ForwardCache<float>&,
                                          const TensorT<float>&);
extern template Gradients<double> backward(const NetworkT<double>&, const ForwardCache<double>&,
                                           const TensorT<double>&);
extern template LossResult<float> mse_loss(const TensorT<float>&, const TensorT<float>&);
extern template LossResult<double> mse_loss(const TensorT<double>&, const TensorT<double>&);
extern template struct Gradients<float>;
extern template struct Gradients<double>;

}  // namespace dfs::nn
