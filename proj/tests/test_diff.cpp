#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "nolab/diff.hpp"
#include "nolab/rng.hpp"
#include "test_support.hpp"

using namespace nolab;
using namespace nolab::testing;

namespace {

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed, double scale = 1.0) {
    Tensor t(shape);
    for (std::size_t k = 0; k < t.data.size(); ++k) {
        t.data[k] = scale * (2.0 * rng::uniform(seed, 13, k) - 1.0);
    }
    return t;
}

// Central-difference check of d(loss)/d(theta) along 20 random directions.
// loss_fn must rebuild the graph from the parameter values each call.
void check_gradient(const std::vector<Tensor>& params,
                    const std::function<double(const std::vector<Tensor>&,
                                               std::vector<Tensor>*)>& loss_fn,
                    std::uint64_t seed, double tol = 1e-4) {
    std::vector<Tensor> grads;
    loss_fn(params, &grads);
    REQUIRE(grads.size() == params.size());
    const double h = 1e-5;
    for (int probe = 0; probe < 20; ++probe) {
        std::vector<Tensor> dir;
        double analytic = 0.0;
        for (std::size_t p = 0; p < params.size(); ++p) {
            Tensor d(params[p].shape);
            for (std::size_t k = 0; k < d.data.size(); ++k) {
                d.data[k] = 2.0 * rng::uniform(seed, 1000 + probe, p * 100000 + k) - 1.0;
                analytic += grads[p].data[k] * d.data[k];
            }
            dir.push_back(std::move(d));
        }
        std::vector<Tensor> plus = params, minus = params;
        for (std::size_t p = 0; p < params.size(); ++p) {
            for (std::size_t k = 0; k < plus[p].data.size(); ++k) {
                plus[p].data[k] += h * dir[p].data[k];
                minus[p].data[k] -= h * dir[p].data[k];
            }
        }
        const double fd = (loss_fn(plus, nullptr) - loss_fn(minus, nullptr)) / (2.0 * h);
        CHECK(std::abs(analytic - fd) / (std::abs(fd) + 1e-12) < tol);
    }
}

}  // namespace

TEST_CASE("gelu values") {
    CHECK(gelu(0.0) == 0.0);
    CHECK(std::abs(gelu(10.0) - 10.0) < 1e-6);
    CHECK(gelu(-4.0) < 0.0);
    CHECK(std::abs(gelu(-10.0)) < 1e-6);
}

TEST_CASE("sum of squares has gradient 2x") {
    Tape tape;
    const Tensor x = random_tensor({4, 3}, 1);
    const int xid = tape.leaf(x, true);
    const int root = tape.scale(tape.mean_all(tape.mul(xid, xid)), double(x.numel()));
    tape.backward(root);
    const Tensor& g = tape.grad(xid);
    for (std::size_t k = 0; k < x.data.size(); ++k) CHECK(g.data[k] == 2.0 * x.data[k]);
}

TEST_CASE("mean has the constant adjoint 1/N") {
    Tape tape;
    const Tensor x = random_tensor({8, 2}, 2);
    const int xid = tape.leaf(x, true);
    tape.backward(tape.mean_all(xid));
    for (double v : tape.grad(xid).data) CHECK(v == 1.0 / 16.0);
}

TEST_CASE("backward requires a scalar root and attached parameters") {
    Tape tape;
    const int a = tape.leaf(random_tensor({2, 2}, 3), true);
    const int b = tape.leaf(random_tensor({2, 2}, 4), false);
    CHECK_THROWS(tape.backward(a));  // non-scalar root
    const int root = tape.mean_all(a);
    tape.backward(root);
    CHECK_THROWS(tape.grad(b));  // detached (no-grad) leaf
}

TEST_CASE("shape mismatches are rejected") {
    Tape tape;
    const int a = tape.leaf(Tensor({2, 3}, 1.0));
    const int b = tape.leaf(Tensor({2, 2}, 1.0));
    CHECK_THROWS(tape.add(a, b));
    CHECK_THROWS(tape.matmul(a, b));
    CHECK_THROWS(tape.broadcast_add(a, b));
}

TEST_CASE("spectral_conv with K = 0 and identity multiplier is the channel mean") {
    const Grid2D g(16, 16);
    const int d = 3;
    SpectralConvSpec spec{g, 0, d, d};
    Tensor w(spec.weight_shape(), 0.0);
    for (int i = 0; i < d; ++i) w.data[std::size_t(i) * d + i] = 1.0;  // P_0 = I (unit square)
    Tape tape;
    const Tensor v = random_tensor({int(g.num_points()), d}, 5);
    const int out = tape.spectral_conv(tape.leaf(v), tape.leaf(w), spec);
    // Per-channel means, independently.
    std::vector<double> mean(d, 0.0);
    for (int p = 0; p < int(g.num_points()); ++p) {
        for (int ch = 0; ch < d; ++ch) mean[ch] += v.data[std::size_t(p) * d + ch];
    }
    for (double& m : mean) m /= double(g.num_points());
    const Tensor& o = tape.val(out);
    for (int p = 0; p < int(g.num_points()); ++p) {
        for (int ch = 0; ch < d; ++ch) {
            CHECK(std::abs(o.data[std::size_t(p) * d + ch] - mean[ch]) < 1e-12);
        }
    }
}

TEST_CASE("spectral_conv is linear in v and satisfies the transpose identity") {
    const Grid2D g(16, 16);
    const int d = 2, K = 2;
    SpectralConvSpec spec{g, K, d, d};
    const Tensor w = random_tensor(spec.weight_shape(), 6, 0.3);
    const int n = int(g.num_points());
    const Tensor v = random_tensor({n, d}, 7);
    const Tensor u = random_tensor({n, d}, 8);

    auto apply = [&](const Tensor& x) {
        Tape tape;
        return tape.val(tape.spectral_conv(tape.leaf(x), tape.leaf(w), spec));
    };
    // <A v, u> = <v, A^T u> where A^T u is obtained through the VJP.
    const Tensor Av = apply(v);
    double lhs = 0.0;
    for (std::size_t k = 0; k < Av.data.size(); ++k) lhs += Av.data[k] * u.data[k];

    Tape tape;
    const int vid = tape.leaf(v, true);
    const int out = tape.spectral_conv(vid, tape.leaf(w), spec);
    // loss = sum(out * u) via mean * numel
    const int loss = tape.scale(tape.mean_all(tape.mul(out, tape.leaf(u))), double(u.numel()));
    tape.backward(loss);
    const Tensor& Atu = tape.grad(vid);
    double rhs = 0.0;
    for (std::size_t k = 0; k < Atu.data.size(); ++k) rhs += v.data[k] * Atu.data[k];
    CHECK(std::abs(lhs - rhs) < 1e-10 * (std::abs(lhs) + 1.0));
}

TEST_CASE("finite differences: dense and pointwise primitives") {
    // loss = mean((gelu(concat(x W1 + b, tile(mean_rows(x))) W2))^2) exercises
    // matmul, broadcast_add, activation, concat, tile_rows, mean_rows.
    const int n = 6, d = 4;
    std::vector<Tensor> params = {random_tensor({d, d}, 21, 0.7), random_tensor({1, d}, 22, 0.5),
                                  random_tensor({2 * d, 3}, 23, 0.7)};
    const Tensor x = random_tensor({n, d}, 24);
    auto loss_fn = [&](const std::vector<Tensor>& p, std::vector<Tensor>* grads) {
        Tape tape;
        const int xid = tape.leaf(x, false);
        const int w1 = tape.leaf(p[0], true);
        const int b1 = tape.leaf(p[1], true);
        const int w2 = tape.leaf(p[2], true);
        const int h = tape.activation(tape.broadcast_add(tape.matmul(xid, w1), b1),
                                      Activation::Gelu);
        const int m = tape.tile_rows(tape.mean_rows(xid), n);
        const int cat = tape.concat_cols(h, m);
        const int out = tape.activation(tape.matmul(cat, w2), Activation::Tanh);
        const int loss = tape.mean_all(tape.mul(out, out));
        if (grads) *grads = grad(tape, loss, {w1, b1, w2});
        return tape.val(loss).data[0];
    };
    check_gradient(params, loss_fn, 31);
}

TEST_CASE("finite differences: spectral_conv in v and weights") {
    const Grid2D g(8, 8);
    const int d = 2, K = 2;
    SpectralConvSpec spec{g, K, d, d};
    const int n = int(g.num_points());
    std::vector<Tensor> params = {random_tensor({n, d}, 41, 0.8),
                                  random_tensor(spec.weight_shape(), 42, 0.4)};
    auto loss_fn = [&](const std::vector<Tensor>& p, std::vector<Tensor>* grads) {
        Tape tape;
        const int v = tape.leaf(p[0], true);
        const int w = tape.leaf(p[1], true);
        const int out = tape.activation(tape.spectral_conv(v, w, spec), Activation::Tanh);
        const int loss = tape.mean_all(tape.mul(out, out));
        if (grads) *grads = grad(tape, loss, {v, w});
        return tape.val(loss).data[0];
    };
    check_gradient(params, loss_fn, 43);
}

TEST_CASE("finite differences: cosine_conv in v and weights") {
    const Grid2D g(8, 8);
    const int d = 2, K = 1;
    CosineConvSpec spec{g, K, d, d};
    const int n = int(g.num_points());
    std::vector<Tensor> params = {random_tensor({n, d}, 51, 0.8),
                                  random_tensor(spec.weight_shape(), 52, 0.4)};
    auto loss_fn = [&](const std::vector<Tensor>& p, std::vector<Tensor>* grads) {
        Tape tape;
        const int v = tape.leaf(p[0], true);
        const int w = tape.leaf(p[1], true);
        const int out = tape.activation(tape.cosine_conv(v, w, spec), Activation::Gelu);
        const int loss = tape.mean_all(tape.mul(out, out));
        if (grads) *grads = grad(tape, loss, {v, w});
        return tape.val(loss).data[0];
    };
    check_gradient(params, loss_fn, 53);
}

TEST_CASE("finite differences: trunk_combine, sub, scale, reshape") {
    const int n = 5, J = 3, c = 2;
    std::vector<Tensor> params = {random_tensor({n, J * c}, 61, 0.8),
                                  random_tensor({1, J}, 62, 0.8),
                                  random_tensor({1, n * c}, 63, 0.8)};
    auto loss_fn = [&](const std::vector<Tensor>& p, std::vector<Tensor>* grads) {
        Tape tape;
        const int tau = tape.leaf(p[0], true);
        const int beta = tape.leaf(p[1], true);
        const int target = tape.leaf(p[2], true);
        const int out = tape.trunk_combine(tau, beta, c);
        const int diff = tape.sub(out, tape.reshape(target, {n, c}));
        const int loss = tape.scale(tape.mean_all(tape.mul(diff, diff)), 1.5);
        if (grads) *grads = grad(tape, loss, {tau, beta, target});
        return tape.val(loss).data[0];
    };
    check_gradient(params, loss_fn, 64);
}

TEST_CASE("mlp_forward") {
    SUBCASE("zero weights broadcast the bias") {
        MlpParams mlp = MlpParams::glorot({3, 4}, Activation::Tanh, 0);
        for (double& v : mlp.weights[0].data) v = 0.0;
        mlp.biases[0].data = {1.0, -2.0, 3.0, 4.0};
        const Tensor out = mlp_eval(mlp, random_tensor({5, 3}, 71));
        for (int i = 0; i < 5; ++i) {
            CHECK(out.data[std::size_t(i) * 4 + 0] == 1.0);
            CHECK(out.data[std::size_t(i) * 4 + 1] == -2.0);
            CHECK(out.data[std::size_t(i) * 4 + 3] == 4.0);
        }
    }
    SUBCASE("identity weights reproduce the input") {
        MlpParams mlp = MlpParams::glorot({3, 3}, Activation::Tanh, 0);
        for (double& v : mlp.weights[0].data) v = 0.0;
        for (int i = 0; i < 3; ++i) mlp.weights[0].data[std::size_t(i) * 3 + i] = 1.0;
        const Tensor x = random_tensor({4, 3}, 72);
        const Tensor out = mlp_eval(mlp, x);
        CHECK(out.data == x.data);
    }
    SUBCASE("gradient check through a two-hidden-layer net") {
        MlpParams mlp = MlpParams::glorot({3, 6, 6, 2}, Activation::Gelu, 5);
        const Tensor x = random_tensor({7, 3}, 73);
        std::vector<Tensor> params;
        for (auto& w : mlp.weights) params.push_back(w);
        for (auto& b : mlp.biases) params.push_back(b);
        auto loss_fn = [&](const std::vector<Tensor>& p, std::vector<Tensor>* grads) {
            MlpParams m = mlp;
            for (std::size_t l = 0; l < m.weights.size(); ++l) m.weights[l] = p[l];
            for (std::size_t l = 0; l < m.biases.size(); ++l) {
                m.biases[l] = p[m.weights.size() + l];
            }
            Tape tape;
            const int xid = tape.leaf(x, false);
            const TapedMlp ids = register_mlp(tape, m, true);
            const int out = mlp_forward(tape, m, ids, xid);
            const int loss = tape.mean_all(tape.mul(out, out));
            if (grads) {
                std::vector<int> wrt = ids.weights;
                wrt.insert(wrt.end(), ids.biases.begin(), ids.biases.end());
                *grads = grad(tape, loss, wrt);
            }
            return tape.val(loss).data[0];
        };
        check_gradient(params, loss_fn, 74);
    }
    SUBCASE("width mismatch raises") {
        MlpParams mlp = MlpParams::glorot({3, 4}, Activation::Tanh, 0);
        CHECK_THROWS(mlp_eval(mlp, Tensor({2, 5}, 1.0)));
    }
}

TEST_CASE("tape evaluation is deterministic") {
    auto run = [] {
        Tape tape;
        const int x = tape.leaf(random_tensor({16, 4}, 99), true);
        const int w = tape.leaf(random_tensor({4, 4}, 98), true);
        const int out = tape.activation(tape.matmul(x, w), Activation::Gelu);
        const int loss = tape.mean_all(tape.mul(out, out));
        tape.backward(loss);
        return std::make_pair(tape.val(loss).data[0], tape.grad(w).data);
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
}
