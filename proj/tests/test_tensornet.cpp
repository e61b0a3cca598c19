#include <cmath>
#include <string>

#include "dfs/nn.hpp"
#include "dfs/rng.hpp"
#include "dfs/weights.hpp"
#include "doctest.h"

using namespace dfs;
using namespace dfs::nn;

namespace {

// Finite-difference oracle: perturb every parameter (and the inputs) of a
// 64-bit copy and compare central differences of a fixed linear functional
// sum(out * r) against the analytic backward pass.
struct FdCheck {
    double max_rel = 0.0;

    void compare(double analytic, double fd) {
        double rel = std::abs(analytic - fd) / std::max({1.0, std::abs(analytic), std::abs(fd)});
        max_rel = std::max(max_rel, rel);
    }
};

// relu sign pattern and pool argmax pattern; a central difference is only a
// valid derivative sample if the perturbed evaluations keep the same pattern.
std::uint64_t activation_pattern(const NetworkT<double>& net, const ForwardCache<double>& cache) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ull;
    };
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& in = cache.acts[i];
        if (net.layers[i].kind == LayerKind::Relu) {
            for (double v : in.data) mix(v > 0 ? 1 : 0);
        } else if (net.layers[i].kind == LayerKind::MaxPool2d) {
            int c = in.shape[0], hh = in.shape[1], w = in.shape[2];
            for (int ch = 0; ch < c; ++ch)
                for (int oy = 0; oy + 1 < hh; oy += 2)
                    for (int ox = 0; ox + 1 < w; ox += 2) {
                        std::size_t base = (static_cast<std::size_t>(ch) * hh + oy) * w + ox;
                        std::size_t offs[4] = {base, base + 1, base + w, base + w + 1};
                        int best = 0;
                        for (int k = 1; k < 4; ++k)
                            if (in.data[offs[k]] > in.data[offs[best]]) best = k;
                        mix(static_cast<std::uint64_t>(best));
                    }
        }
    }
    return h;
}

struct FdStats {
    double max_rel = 0.0;
    int compared = 0;
    int skipped = 0;
};

FdStats fd_check_net(const Network& net32, const TensorT<double>& input, const TensorT<double>& aux, Rng& rng,
                     double eps = 1e-3) {
    NetworkT<double> net = net32.cast<double>();

    TensorT<double> baseline_out;
    {
        ForwardCache<double> c;
        baseline_out = forward(net, input, aux, &c);
    }
    TensorT<double> r(baseline_out.shape);
    for (auto& v : r.data) v = rng.uniform(-1, 1);

    auto scalar = [&](const NetworkT<double>& n, const TensorT<double>& in, const TensorT<double>& ax,
                      std::uint64_t* pattern) {
        ForwardCache<double> c;
        TensorT<double> o = forward(n, in, ax, &c);
        if (pattern) *pattern = activation_pattern(n, c);
        double s = 0;
        for (std::size_t i = 0; i < o.data.size(); ++i) s += o.data[i] * r.data[i];
        return s;
    };

    ForwardCache<double> cache;
    forward(net, input, aux, &cache);
    std::uint64_t base_pattern = activation_pattern(net, cache);
    Gradients<double> g = backward(net, cache, r);

    FdCheck chk;
    FdStats stats;
    auto probe = [&](double analytic, auto&& set, auto&& restore) {
        std::uint64_t p1, p2;
        set(eps);
        double hi = scalar(net, input, aux, &p1);
        set(-eps);
        double lo = scalar(net, input, aux, &p2);
        restore();
        if (p1 != base_pattern || p2 != base_pattern) {
            ++stats.skipped;
            return;
        }
        chk.compare(analytic, (hi - lo) / (2 * eps));
        ++stats.compared;
    };

    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        for (auto [param, grad] : {std::pair{&net.weights[li], &g.weights[li]}, std::pair{&net.biases[li], &g.biases[li]}}) {
            for (std::size_t j = 0; j < param->data.size(); ++j) {
                double keep = param->data[j];
                probe(grad->data[j], [&, keep](double d) { param->data[j] = keep + d; },
                      [&, keep] { param->data[j] = keep; });
            }
        }
    }

    // input and aux gradients, same recipe
    TensorT<double> in = input;
    auto scalar_in = [&](std::uint64_t* pattern) { return scalar(net, in, aux, pattern); };
    for (std::size_t j = 0; j < in.data.size(); ++j) {
        double keep = in.data[j];
        std::uint64_t p1, p2;
        in.data[j] = keep + eps;
        double hi = scalar_in(&p1);
        in.data[j] = keep - eps;
        double lo = scalar_in(&p2);
        in.data[j] = keep;
        if (p1 != base_pattern || p2 != base_pattern) {
            ++stats.skipped;
            continue;
        }
        chk.compare(g.input.data[j], (hi - lo) / (2 * eps));
        ++stats.compared;
    }
    TensorT<double> ax = aux;
    for (std::size_t j = 0; j < ax.data.size(); ++j) {
        double keep = ax.data[j];
        std::uint64_t p1, p2;
        ax.data[j] = keep + eps;
        double hi = scalar(net, input, ax, &p1);
        ax.data[j] = keep - eps;
        double lo = scalar(net, input, ax, &p2);
        ax.data[j] = keep;
        if (p1 != base_pattern || p2 != base_pattern) {
            ++stats.skipped;
            continue;
        }
        chk.compare(g.aux.data[j], (hi - lo) / (2 * eps));
        ++stats.compared;
    }
    stats.max_rel = chk.max_rel;
    return stats;
}

TensorT<double> random_input(const std::vector<int>& shape, Rng& rng, double min_abs = 0.0) {
    TensorT<double> t(shape);
    for (auto& v : t.data) {
        do {
            v = rng.uniform(-1, 1);
        } while (std::abs(v) < min_abs);
    }
    return t;
}

// Keeps max-pool argmaxes stable under the finite-difference step.
bool pool_windows_well_separated(const TensorT<double>& t, double gap) {
    int c = t.shape[0], h = t.shape[1], w = t.shape[2];
    for (int ch = 0; ch < c; ++ch)
        for (int oy = 0; oy + 1 < h; oy += 2)
            for (int ox = 0; ox + 1 < w; ox += 2) {
                double vals[4] = {t.data[(ch * h + oy) * w + ox], t.data[(ch * h + oy) * w + ox + 1],
                                  t.data[(ch * h + oy + 1) * w + ox], t.data[(ch * h + oy + 1) * w + ox + 1]};
                double m1 = -1e30, m2 = -1e30;
                for (double v : vals) {
                    if (v > m1) {
                        m2 = m1;
                        m1 = v;
                    } else if (v > m2) {
                        m2 = v;
                    }
                }
                if (m1 - m2 < gap) return false;
            }
    return true;
}

}  // namespace

TEST_CASE("dense forward hand example") {
    Network net = NetBuilder({2}).dense(1).build();
    net.weights[0].data = {1.0f, 2.0f};
    net.biases[0].data = {0.5f};
    Tensor out = forward(net, Tensor({2}, {3.0f, 4.0f}));
    CHECK(out.data[0] == doctest::Approx(11.5));
}

TEST_CASE("relu forward") {
    Network net = NetBuilder({2}).relu().build();
    Tensor out = forward(net, Tensor({2}, {-1.0f, 2.0f}));
    CHECK(out.data[0] == 0.0f);
    CHECK(out.data[1] == 2.0f);
}

TEST_CASE("zero-initialized final dense gives zero output") {
    Rng rng(1);
    Network net = NetBuilder({4}).dense(8).relu().dense(3).build();
    init_weights(net, rng, /*zero_final_dense=*/true);
    for (int trial = 0; trial < 5; ++trial) {
        Tensor in({4});
        for (auto& v : in.data) v = static_cast<float>(rng.uniform(-5, 5));
        Tensor out = forward(net, in);
        for (float v : out.data) CHECK(v == 0.0f);
    }
}

TEST_CASE("forward is pure and shape errors name the layer") {
    Rng rng(2);
    Network net = NetBuilder({1, 6, 6}).conv2d(2, 3).relu().flatten().dense(3).build();
    init_weights(net, rng, false);
    Tensor in({1, 6, 6});
    for (auto& v : in.data) v = static_cast<float>(rng.uniform(-1, 1));
    Tensor a = forward(net, in);
    Tensor b = forward(net, in);
    CHECK(a.data == b.data);

    CHECK_THROWS_WITH_AS(forward(net, Tensor({1, 5, 5})), doctest::Contains("does not match"),
                         std::invalid_argument);
}

TEST_CASE("backward before forward is an error") {
    Network net = NetBuilder({2}).dense(1).build();
    ForwardCache<float> empty;
    CHECK_THROWS_AS(backward(net, empty, Tensor({1})), std::logic_error);
}

TEST_CASE("single dense layer closed-form gradient") {
    Network net = NetBuilder({3}).dense(1).build();
    Rng rng(9);
    for (auto& v : net.weights[0].data) v = static_cast<float>(rng.uniform(-1, 1));
    net.biases[0].data = {0.25f};
    Tensor in({3}, {0.5f, -1.5f, 2.0f});
    Tensor target({1}, {1.0f});

    ForwardCache<float> cache;
    Tensor pred = forward(net, in, &cache);
    auto loss = mse_loss(pred, target);
    Gradients<float> g = backward(net, cache, loss.grad);

    float d = pred.data[0] - target.data[0];
    for (int j = 0; j < 3; ++j) CHECK(g.weights[0].data[j] == doctest::Approx(2.0 * d * in.data[j]));
    CHECK(g.biases[0].data[0] == doctest::Approx(2.0 * d));
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
    Rng rng(4);
    Network net = NetBuilder({1, 8, 8}, 3).conv2d(2, 3).relu().maxpool2d().flatten().concat_aux().dense(4).build();
    init_weights(net, rng, false);
    Tensor in({1, 8, 8});
    for (auto& v : in.data) v = static_cast<float>(rng.uniform(-1, 1));
    Tensor aux({3}, {1.0f, 2.0f, 3.0f});
    ForwardCache<float> cache;
    forward(net, in, aux, &cache);
    Gradients<float> g = backward(net, cache, Tensor({4}));
    for (std::size_t i = 0; i < g.weights.size(); ++i) {
        for (float v : g.weights[i].data) CHECK(v == 0.0f);
        for (float v : g.biases[i].data) CHECK(v == 0.0f);
    }
}

TEST_CASE("gradient check: dense") {
    Rng rng(100);
    for (int cfg = 0; cfg < 20; ++cfg) {
        int n = 1 + static_cast<int>(rng.uniform(1, 10));
        int m = 1 + static_cast<int>(rng.uniform(0, 6));
        Network net = NetBuilder({n}).dense(m).build();
        init_weights(net, rng, false);
        CHECK(fd_check_net(net, random_input({n}, rng), {}, rng).max_rel < 1e-4);
    }
}

TEST_CASE("gradient check: conv2d") {
    Rng rng(101);
    for (int cfg = 0; cfg < 20; ++cfg) {
        int c = 1 + static_cast<int>(rng.uniform(0, 3));
        int k = 2 + static_cast<int>(rng.uniform(0, 2));
        int h = k + 1 + static_cast<int>(rng.uniform(0, 5));
        int w = k + 1 + static_cast<int>(rng.uniform(0, 5));
        int oc = 1 + static_cast<int>(rng.uniform(0, 3));
        int stride = 1 + static_cast<int>(rng.uniform(0, 2));
        Network net = NetBuilder({c, h, w}).conv2d(oc, k, stride).build();
        init_weights(net, rng, false);
        CHECK(fd_check_net(net, random_input({c, h, w}, rng), {}, rng).max_rel < 1e-4);
    }
}

TEST_CASE("gradient check: relu") {
    Rng rng(102);
    for (int cfg = 0; cfg < 20; ++cfg) {
        int n = 2 + static_cast<int>(rng.uniform(0, 12));
        Network net = NetBuilder({n}).relu().build();
        // stay away from the kink at zero
        CHECK(fd_check_net(net, random_input({n}, rng, 0.05), {}, rng).max_rel < 1e-4);
    }
}

TEST_CASE("gradient check: max-pool2d") {
    Rng rng(103);
    for (int cfg = 0; cfg < 20; ++cfg) {
        int c = 1 + static_cast<int>(rng.uniform(0, 3));
        int h = 2 + 2 * static_cast<int>(rng.uniform(0, 3));
        int w = 2 + 2 * static_cast<int>(rng.uniform(0, 3));
        Network net = NetBuilder({c, h, w}).maxpool2d().build();
        TensorT<double> in;
        do {
            in = random_input({c, h, w}, rng);
        } while (!pool_windows_well_separated(in, 0.01));
        CHECK(fd_check_net(net, in, {}, rng).max_rel < 1e-4);
    }
}

TEST_CASE("gradient check: flatten and concat-aux") {
    Rng rng(104);
    for (int cfg = 0; cfg < 20; ++cfg) {
        int c = 1 + static_cast<int>(rng.uniform(0, 2));
        int h = 2 + static_cast<int>(rng.uniform(0, 3));
        int aux = 1 + static_cast<int>(rng.uniform(0, 4));
        Network net = NetBuilder({c, h, h}, aux).flatten().concat_aux().dense(3).build();
        init_weights(net, rng, false);
        CHECK(fd_check_net(net, random_input({c, h, h}, rng), random_input({aux}, rng), rng).max_rel < 1e-4);
    }
}

TEST_CASE("gradient check: full update-network topology") {
    Rng rng(105);
    for (int cfg = 0; cfg < 3; ++cfg) {
        Network net = NetBuilder({3, 12, 12}, 7)
                          .conv2d(4, 3)
                          .relu()
                          .maxpool2d()
                          .conv2d(6, 3)
                          .relu()
                          .flatten()
                          .concat_aux()
                          .dense(16)
                          .relu()
                          .dense(7)
                          .build();
        init_weights(net, rng, false);
        auto in = random_input({3, 12, 12}, rng);
        auto aux = random_input({7}, rng);
        FdStats s = fd_check_net(net, in, aux, rng, 1e-4);
        CHECK(s.max_rel < 1e-4);
        CHECK(s.compared > 10 * s.skipped);  // kink crossings must stay rare
    }
}

TEST_CASE("mse_loss") {
    Tensor a({2}, {1.0f, 1.0f});
    Tensor b({2}, {0.0f, 0.0f});
    CHECK(mse_loss(a, a).value == 0.0f);
    CHECK(mse_loss(a, b).value == doctest::Approx(1.0));
    CHECK_THROWS_AS(mse_loss(a, Tensor({3})), std::invalid_argument);

    // gradient vs finite differences (64-bit)
    Rng rng(6);
    TensorT<double> p({5}), t({5});
    for (auto& v : p.data) v = rng.uniform(-2, 2);
    for (auto& v : t.data) v = rng.uniform(-2, 2);
    auto res = mse_loss(p, t);
    double eps = 1e-6;
    for (int i = 0; i < 5; ++i) {
        TensorT<double> hi = p, lo = p;
        hi.data[i] += eps;
        lo.data[i] -= eps;
        double fd = (mse_loss(hi, t).value - mse_loss(lo, t).value) / (2 * eps);
        CHECK(res.grad.data[i] == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("adam: zero gradient leaves parameters, decays moments") {
    Rng rng(7);
    Network net = NetBuilder({2}).dense(2).build();
    init_weights(net, rng, false);
    AdamState st = AdamState::make(net);

    Gradients<float> g;
    g.weights.resize(1);
    g.biases.resize(1);
    g.weights[0] = Tensor(net.weights[0].shape);
    g.biases[0] = Tensor(net.biases[0].shape);

    // from a fresh state, zero gradients never move the parameters
    auto params = net.weights[0].data;
    for (int i = 0; i < 3; ++i) adam_step(st, net, g);
    CHECK(net.weights[0].data == params);

    // preset moments decay by their betas under a zero gradient
    st.m_w[0].data[0] = 0.8f;
    st.v_w[0].data[0] = 0.4f;
    adam_step(st, net, g);
    CHECK(st.m_w[0].data[0] == doctest::Approx(0.8f * 0.9f));
    CHECK(st.v_w[0].data[0] == doctest::Approx(0.4f * 0.999f));
}

TEST_CASE("adam: first step and constant-gradient asymptote") {
    Network net = NetBuilder({1}).dense(1).build();
    net.weights[0].data = {1.0f};
    net.biases[0].data = {0.0f};
    AdamConfig cfg;
    cfg.lr = 0.01f;
    AdamState st = AdamState::make(net, cfg);

    Gradients<float> g;
    g.weights.resize(1);
    g.biases.resize(1);
    g.weights[0] = Tensor({1, 1}, {0.3f});
    g.biases[0] = Tensor({1}, {0.0f});

    adam_step(st, net, g);
    CHECK(net.weights[0].data[0] == doctest::Approx(1.0f - 0.01f * 0.3f / (0.3f + 1e-8f)).epsilon(1e-5));

    float prev = net.weights[0].data[0];
    for (int i = 0; i < 300; ++i) {
        adam_step(st, net, g);
        float step = prev - net.weights[0].data[0];
        prev = net.weights[0].data[0];
        if (i > 100) CHECK(step == doctest::Approx(0.01f).epsilon(0.05));
    }
}

TEST_CASE("adam rejects non-finite gradients") {
    Network net = NetBuilder({1}).dense(1).build();
    AdamState st = AdamState::make(net);
    Gradients<float> g;
    g.weights.resize(1);
    g.biases.resize(1);
    g.weights[0] = Tensor({1, 1}, {std::nanf("")});
    g.biases[0] = Tensor({1});
    CHECK_THROWS_WITH_AS(adam_step(st, net, g), doctest::Contains("layer 0"), std::runtime_error);
}

TEST_CASE("weights round trip is bit-exact") {
    Rng rng(8);
    Network net = NetBuilder({2, 8, 8}, 4).conv2d(3, 3).relu().maxpool2d().flatten().concat_aux().dense(5).build();
    init_weights(net, rng, false);
    Tensor in({2, 8, 8});
    for (auto& v : in.data) v = static_cast<float>(rng.uniform(-1, 1));
    Tensor aux({4}, {0.1f, 0.2f, 0.3f, 0.4f});
    Tensor out1 = forward(net, in, aux);

    auto bytes = save_weights(net);
    Network net2 = NetBuilder({2, 8, 8}, 4).conv2d(3, 3).relu().maxpool2d().flatten().concat_aux().dense(5).build();
    load_weights(net2, bytes);
    Tensor out2 = forward(net2, in, aux);
    CHECK(out1.data == out2.data);
    CHECK(save_weights(net2) == bytes);
}

TEST_CASE("weights errors are distinct") {
    Rng rng(9);
    Network net = NetBuilder({3}).dense(2).build();
    init_weights(net, rng, false);
    auto bytes = save_weights(net);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_WITH_AS(read_weights(bad_magic), doctest::Contains("magic"), std::runtime_error);

    Network other = NetBuilder({4}).dense(2).build();
    CHECK_THROWS_WITH_AS(load_weights(other, bytes), doctest::Contains("shape"), std::runtime_error);

    auto truncated = bytes;
    truncated.resize(truncated.size() - 3);
    CHECK_THROWS_WITH_AS(read_weights(truncated), doctest::Contains("truncated"), std::runtime_error);
}

TEST_CASE("fixed seed gives bit-exact training trajectories") {
    auto run = [](std::uint64_t seed) {
        Rng rng(seed);
        Network net = NetBuilder({1, 6, 6}).conv2d(2, 3).relu().flatten().dense(2).build();
        init_weights(net, rng, false);
        AdamState st = AdamState::make(net);
        Tensor in({1, 6, 6});
        for (auto& v : in.data) v = static_cast<float>(rng.uniform(-1, 1));
        Tensor target({2}, {0.3f, -0.7f});
        for (int i = 0; i < 20; ++i) {
            ForwardCache<float> cache;
            Tensor pred = forward(net, in, &cache);
            auto loss = mse_loss(pred, target);
            auto g = backward(net, cache, loss.grad);
            adam_step(st, net, g);
        }
        return save_weights(net);
    };
    CHECK(run(77) == run(77));
    CHECK(run(77) != run(78));
}

TEST_CASE("parameter count closed form") {
    Network pose = NetBuilder({3, 64, 64}, 7)
                       .conv2d(8, 5)
                       .relu()
                       .maxpool2d()
                       .conv2d(16, 5)
                       .relu()
                       .maxpool2d()
                       .flatten()
                       .concat_aux()
                       .dense(128)
                       .relu()
                       .dense(7)
                       .build();
    std::size_t conv1 = 8 * 3 * 5 * 5 + 8;
    std::size_t conv2 = 16 * 8 * 5 * 5 + 16;
    std::size_t d1 = 128 * (16 * 13 * 13 + 7) + 128;
    std::size_t d2 = 7 * 128 + 7;
    CHECK(param_count(pose) == conv1 + conv2 + d1 + d2);
}
