#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "nolab/neuralop.hpp"
#include "nolab/spectral.hpp"
#include "test_support.hpp"

using namespace nolab;
using namespace nolab::testing;

namespace {
constexpr double kPi = std::numbers::pi;

double max_abs_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        m = std::max(m, std::abs(a.data[k] - b.data[k]));
    }
    return m;
}

void zero_params(NnoModel& m) {
    for (Tensor* t : m.parameters()) {
        for (double& v : t->data) v = 0.0;
    }
}

Field band_limited_input(const Grid2D& grid, int kmax) {
    // Explicit low-mode sum so the same function can be sampled on any grid.
    return field_of(grid, [kmax](double x, double y, int) {
        double s = 0.0;
        for (int k1 = 0; k1 <= kmax; ++k1) {
            for (int k2 = 0; k2 <= kmax; ++k2) {
                s += 0.3 / (1.0 + k1 + k2) *
                     std::cos(2.0 * kPi * (k1 * x + k2 * y) + 0.7 * k1 - 0.3 * k2);
            }
        }
        return s;
    });
}

}  // namespace

TEST_CASE("lift") {
    const Grid2D g(16, 16);
    SUBCASE("zero R-net broadcasts its bias") {
        NnoConfig c = NnoConfig::ano(1, 1, 4);
        c.lifting_depth = 0;
        NnoModel m = NnoModel::init(c, 1);
        for (double& v : m.lift.weights[0].data) v = 0.0;
        m.lift.biases[0].data = {1.0, 2.0, 3.0, 4.0};
        const Field u = random_field(g, 1, 5);
        const Tensor v = lift(m, u);
        for (int p = 0; p < int(g.num_points()); ++p) {
            for (int ch = 0; ch < 4; ++ch) CHECK(v.data[std::size_t(p) * 4 + ch] == ch + 1.0);
        }
    }
    SUBCASE("matches a per-point scalar-loop oracle") {
        NnoConfig c = NnoConfig::ano(2, 1, 5);
        NnoModel m = NnoModel::init(c, 2);
        const Field u = random_field(g, 2, 6);
        const Tensor v = lift(m, u);
        const Field xy = coords_field(g);
        for (int p = 0; p < int(g.num_points()); p += 37) {
            Tensor row({1, 4});
            row.data = {u.data[std::size_t(p) * 2], u.data[std::size_t(p) * 2 + 1],
                        xy.data[std::size_t(p) * 2], xy.data[std::size_t(p) * 2 + 1]};
            const Tensor expect = mlp_eval(m.lift, row);
            for (int ch = 0; ch < 5; ++ch) {
                CHECK(v.data[std::size_t(p) * 5 + ch] ==
                      doctest::Approx(expect.data[ch]).epsilon(1e-14));
            }
        }
    }
    SUBCASE("without positional encoding the lift is permutation-pointwise") {
        NnoConfig c = NnoConfig::ano(1, 1, 3);
        c.positional_encoding = false;
        NnoModel m = NnoModel::init(c, 3);
        Field u = random_field(g, 1, 7);
        const Tensor v = lift(m, u);
        // Swapping two grid samples swaps the lifted rows.
        Field u2 = u;
        std::swap(u2.data[0], u2.data[100]);
        const Tensor v2 = lift(m, u2);
        for (int ch = 0; ch < 3; ++ch) {
            CHECK(v.data[ch] == v2.data[std::size_t(100) * 3 + ch]);
            CHECK(v.data[std::size_t(100) * 3 + ch] == v2.data[ch]);
        }
    }
    SUBCASE("channel mismatch raises") {
        NnoModel m = NnoModel::init(NnoConfig::ano(2, 1, 4), 0);
        CHECK_THROWS(lift(m, random_field(g, 1, 8)));
    }
}

TEST_CASE("nno_layer basis variants") {
    const Grid2D g(16, 16);
    const int d = 4;
    const int n = int(g.num_points());

    SUBCASE("constant basis with W = 0, b = 0, T = I maps constant v0 to tanh(v0)") {
        NnoConfig c = NnoConfig::ano(1, 1, d);
        NnoModel m = NnoModel::init(c, 1);
        for (double& v : m.layers[0].basis_weights.data) v = 0.0;
        for (int i = 0; i < d; ++i) m.layers[0].basis_weights.data[std::size_t(i) * d + i] = 1.0;
        for (double& v : m.layers[0].b.data) v = 0.0;
        Tensor v0({n, d});
        for (int p = 0; p < n; ++p) {
            for (int ch = 0; ch < d; ++ch) v0.data[std::size_t(p) * d + ch] = 0.3 * (ch + 1);
        }
        const Tensor out = nno_layer(m, 0, v0, g);
        for (int p = 0; p < n; ++p) {
            for (int ch = 0; ch < d; ++ch) {
                CHECK(out.data[std::size_t(p) * d + ch] ==
                      doctest::Approx(std::tanh(0.3 * (ch + 1))).epsilon(1e-14));
            }
        }
    }
    SUBCASE("fourier K = 0 with matched parameters equals the constant basis") {
        NnoConfig cc = NnoConfig::ano(1, 1, d);
        cc.use_W = true;
        NnoModel mc = NnoModel::init(cc, 2);

        NnoConfig cf = NnoConfig::fno(1, 1, d, 0, 1);
        cf.activation = Activation::Tanh;
        NnoModel mf = NnoModel::init(cf, 3);
        mf.layers[0].W = mc.layers[0].W;
        mf.layers[0].b = mc.layers[0].b;
        mf.layers[0].basis_weights.data = mc.layers[0].basis_weights.data;  // P_0 = T

        const Tensor v = Tensor::from_field(random_field(g, d, 9));
        const Tensor a = nno_layer(mc, 0, v, g);
        const Tensor b = nno_layer(mf, 0, v, g);
        double m = 0.0;
        for (std::size_t k = 0; k < a.data.size(); ++k) m = std::max(m, std::abs(a.data[k] - b.data[k]));
        CHECK(m < 1e-12);
    }
    SUBCASE("laplace-neumann K = 0 equals the constant basis") {
        NnoConfig cc = NnoConfig::ano(1, 1, d);
        NnoModel mc = NnoModel::init(cc, 4);

        NnoConfig cl = cc;
        cl.basis = BasisKind::LaplaceNeumann;
        cl.K = 0;
        NnoModel ml = NnoModel::init(cl, 5);
        ml.layers[0].b = mc.layers[0].b;
        ml.layers[0].basis_weights.data = mc.layers[0].basis_weights.data;

        const Tensor v = Tensor::from_field(random_field(g, d, 10));
        const Tensor a = nno_layer(mc, 0, v, g);
        const Tensor b = nno_layer(ml, 0, v, g);
        double m = 0.0;
        for (std::size_t k = 0; k < a.data.size(); ++k) m = std::max(m, std::abs(a.data[k] - b.data[k]));
        CHECK(m < 1e-12);
    }
}

TEST_CASE("project") {
    const Grid2D g(16, 16);
    const int d = 4;
    SUBCASE("zero Q-net gives the zero field") {
        NnoConfig c = NnoConfig::fno(1, 1, d, 1, 1);
        NnoModel m = NnoModel::init(c, 1);
        for (auto& w : m.proj.weights)
            for (double& v : w.data) v = 0.0;
        for (auto& b : m.proj.biases)
            for (double& v : b.data) v = 0.0;
        const Field out = project(m, Tensor::from_field(random_field(g, d, 2)), g);
        for (double v : out.data) CHECK(v == 0.0);
    }
    SUBCASE("hand-built Q extracts channel 1") {
        NnoConfig c = NnoConfig::fno(1, 1, d, 1, 1);
        c.projection_depth = 0;  // affine Q
        NnoModel m = NnoModel::init(c, 1);
        for (double& v : m.proj.weights[0].data) v = 0.0;
        m.proj.weights[0].data[1] = 1.0;  // row 1 (channel 1) -> output 0
        for (double& v : m.proj.biases[0].data) v = 0.0;
        const Tensor v = Tensor::from_field(random_field(g, d, 3));
        const Field out = project(m, v, g);
        for (int p = 0; p < int(g.num_points()); ++p) {
            CHECK(out.data[p] == v.data[std::size_t(p) * d + 1]);
        }
    }
    SUBCASE("matches a per-point oracle with q_positional") {
        NnoConfig c = NnoConfig::ano(1, 1, d);
        NnoModel m = NnoModel::init(c, 7);
        const Tensor v = Tensor::from_field(random_field(g, d, 4));
        const Field out = project(m, v, g);
        const Field xy = coords_field(g);
        for (int p = 0; p < int(g.num_points()); p += 41) {
            Tensor row({1, d + 2});
            for (int ch = 0; ch < d; ++ch) row.data[ch] = v.data[std::size_t(p) * d + ch];
            row.data[d] = xy.data[std::size_t(p) * 2];
            row.data[d + 1] = xy.data[std::size_t(p) * 2 + 1];
            CHECK(out.data[p] == doctest::Approx(mlp_eval(m.proj, row).data[0]).epsilon(1e-14));
        }
    }
}

TEST_CASE("ano_forward") {
    const Grid2D g(16, 16);
    SUBCASE("rejects non-ANO configs") {
        NnoModel m = NnoModel::init(NnoConfig::fno(1, 1, 4, 2), 0);
        CHECK_THROWS(ano_forward(m, random_field(g, 1, 1)));
    }
    SUBCASE("output is x-constant when Q ignores x") {
        NnoConfig c = NnoConfig::ano(1, 1, 4);
        c.q_positional = false;
        NnoModel m = NnoModel::init(c, 2);
        const Field out = ano_forward(m, random_field(g, 1, 2));
        for (double v : out.data) CHECK(v == out.data[0]);
    }
    SUBCASE("permuting grid samples leaves the output unchanged without positions") {
        NnoConfig c = NnoConfig::ano(1, 1, 4);
        c.positional_encoding = false;
        c.q_positional = false;
        NnoModel m = NnoModel::init(c, 3);
        Field u = random_field(g, 1, 3);
        const Field a = ano_forward(m, u);
        std::mt19937 rng(1);
        std::shuffle(u.data.begin(), u.data.end(), rng);
        const Field b = ano_forward(m, u);
        CHECK(std::abs(a.data[0] - b.data[0]) < 1e-12);
    }
    SUBCASE("encoder constancy: hidden output variance is zero") {
        NnoConfig c = NnoConfig::ano(1, 1, 6);
        NnoModel m = NnoModel::init(c, 4);
        const Field u = random_field(g, 1, 5);
        const Tensor v = nno_layer(m, 0, lift(m, u), g);
        for (int ch = 0; ch < 6; ++ch) {
            const double first = v.data[ch];
            for (int p = 1; p < int(g.num_points()); ++p) {
                CHECK(std::abs(v.data[std::size_t(p) * 6 + ch] - first) <= 1e-14);
            }
        }
    }
    SUBCASE("equals fno_forward with L = 1, K = 0 under the parameter embedding") {
        NnoConfig ca = NnoConfig::ano(1, 1, 5);
        NnoModel ma = NnoModel::init(ca, 6);

        NnoConfig cf = ca;
        cf.basis = BasisKind::Fourier;
        cf.K = 0;
        NnoModel mf = NnoModel::init(cf, 7);
        mf.lift = ma.lift;
        mf.proj = ma.proj;
        mf.layers[0].b = ma.layers[0].b;
        mf.layers[0].basis_weights.data = ma.layers[0].basis_weights.data;

        const Field u = random_field(g, 1, 8);
        CHECK(max_abs_diff(ano_forward(ma, u), fno_forward(mf, u)) < 1e-12);
    }
}

TEST_CASE("fno_forward") {
    const Grid2D g(16, 16);
    SUBCASE("zero spectral weights and zero W reduce layers to sigma(b)") {
        NnoConfig c = NnoConfig::fno(1, 1, 4, 2, 2);
        NnoModel m = NnoModel::init(c, 1);
        for (auto& layer : m.layers) {
            for (double& v : layer.W.data) v = 0.0;
            for (double& v : layer.basis_weights.data) v = 0.0;
        }
        const Field u = random_field(g, 1, 2);
        const Tensor v1 = nno_layer(m, 0, lift(m, u), g);
        for (int ch = 0; ch < 4; ++ch) {
            const double expect = gelu(m.layers[0].b.data[ch]);
            for (int p = 0; p < int(g.num_points()); ++p) {
                CHECK(v1.data[std::size_t(p) * 4 + ch] == doctest::Approx(expect).epsilon(1e-14));
            }
        }
    }
    SUBCASE("translation equivariance without positional encoding") {
        NnoConfig c = NnoConfig::fno(1, 1, 4, 3, 2);
        c.positional_encoding = false;
        NnoModel m = NnoModel::init(c, 3);
        const Field u = random_field(g, 1, 4);
        const Field out = fno_forward(m, u);
        // Circular shift by (5, 3) cells.
        Field us(g, 1), shifted_out(g, 1);
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                us.at(i, j) = u.at((i + 5) % g.nx, (j + 3) % g.ny);
                shifted_out.at(i, j) = out.at((i + 5) % g.nx, (j + 3) % g.ny);
            }
        }
        CHECK(max_abs_diff(fno_forward(m, us), shifted_out) < 1e-10);
    }
}

TEST_CASE("discretization consistency of a fixed ANO across grids") {
    NnoConfig c = NnoConfig::ano(1, 1, 8);
    c.q_positional = false;
    NnoModel m = NnoModel::init(c, 11);
    const Field u32 = band_limited_input(Grid2D(32, 32), 4);
    const Field u64 = band_limited_input(Grid2D(64, 64), 4);
    const Tensor code32 = encode_average(m, lifting_input(m, u32));
    const Tensor code64 = encode_average(m, lifting_input(m, u64));
    double diff = 0.0;
    for (int ch = 0; ch < 8; ++ch) diff = std::max(diff, std::abs(code32.data[ch] - code64.data[ch]));
    CHECK(diff < 1e-3);
}

TEST_CASE("forwards are pure") {
    const Grid2D g(16, 16);
    NnoModel m = NnoModel::init(NnoConfig::fno(1, 1, 4, 2, 2), 5);
    std::vector<std::vector<double>> before;
    for (Tensor* t : m.parameters()) before.push_back(t->data);
    const Field u = random_field(g, 1, 6);
    const std::vector<double> u_before = u.data;
    (void)fno_forward(m, u);
    CHECK(u.data == u_before);
    std::size_t idx = 0;
    for (Tensor* t : m.parameters()) CHECK(t->data == before[idx++]);
}

TEST_CASE("param_count matches a hand count for d_c = 2, K = 1, L = 1") {
    NnoConfig c = NnoConfig::fno(1, 1, 2, 1, 1);
    // lift: affine (1 input + 2 coords) -> 2: 3*2 + 2            = 8
    // layer: W 2x2 = 4, b 2, fourier slots (2K+1)^2 * 2 * 2 = 36 = 42
    // proj: (2 -> 4 -> 1): 2*4 + 4 + 4*1 + 1                     = 17
    CHECK(param_count(c) == 8 + 42 + 17);
    SUBCASE("constant basis count is independent of K") {
        NnoConfig a = NnoConfig::ano(1, 1, 4);
        NnoConfig b = a;
        b.K = 9;  // K is ignored by the constant basis
        CHECK(param_count(a) == param_count(b));
    }
}

TEST_CASE("budget_pairs enumerates K with d_c = C/K >= 2") {
    const auto pairs = budget_pairs(32);
    REQUIRE(pairs.size() == 4);
    CHECK(pairs[0] == std::pair<int, int>{16, 2});
    CHECK(pairs[1] == std::pair<int, int>{8, 4});
    CHECK(pairs[2] == std::pair<int, int>{4, 8});
    CHECK(pairs[3] == std::pair<int, int>{2, 16});
    CHECK_THROWS(budget_pairs(33));
    CHECK_THROWS(budget_pairs(2));
}
