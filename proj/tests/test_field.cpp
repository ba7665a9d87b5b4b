#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nolab/field.hpp"
#include "test_support.hpp"

using namespace nolab;
using namespace nolab::testing;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("grid construction enforces power-of-two sizes and positive extents") {
    CHECK_NOTHROW(Grid2D(8, 8));
    CHECK_NOTHROW(Grid2D(64, 128, 2.0, 1.0));
    CHECK_THROWS(Grid2D(2, 2));
    CHECK_THROWS(Grid2D(63, 64));
    CHECK_THROWS(Grid2D(8, 8, -1.0, 1.0));
    CHECK_THROWS(Grid2D(8, 8, 1.0, 0.0));
}

TEST_CASE("coords_field samples cell centers") {
    const Grid2D g(8, 8);
    const Field c = coords_field(g);
    CHECK(c.at(0, 0, 0) == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(c.at(0, 0, 1) == doctest::Approx(0.0625).epsilon(1e-15));

    const Grid2D g2(8, 8, 2.0 * kPi, 1.0);
    const Field c2 = coords_field(g2);
    CHECK(c2.at(7, 0, 0) == doctest::Approx(2.0 * kPi * 7.5 / 8.0).epsilon(1e-15));
}

TEST_CASE("mean_over_domain") {
    const Grid2D g(64, 64);
    SUBCASE("constant field") {
        const Field f(g, 1, 3.5);
        CHECK(mean_over_domain(f)[0] == doctest::Approx(3.5).epsilon(1e-15));
    }
    SUBCASE("full-period sine averages to zero") {
        const Field f = field_of(g, [](double x, double, int) { return std::sin(2.0 * kPi * x); });
        CHECK(std::abs(mean_over_domain(f)[0]) < 1e-12);
    }
    SUBCASE("matches Kahan oracle on noise") {
        const Field f = random_field(g, 3, 42);
        const auto m = mean_over_domain(f);
        const auto oracle = kahan_mean(f);
        for (int ch = 0; ch < 3; ++ch) CHECK(std::abs(m[ch] - oracle[ch]) < 1e-14);
    }
}

TEST_CASE("inner_product") {
    const Grid2D g(64, 64);
    SUBCASE("measure of the unit square") {
        const Field ones(g, 1, 1.0);
        CHECK(inner_product(ones, ones) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("orthogonality of sin and cos") {
        const Field f = field_of(g, [](double x, double, int) { return std::sin(2.0 * kPi * x); });
        const Field h = field_of(g, [](double x, double, int) { return std::cos(2.0 * kPi * x); });
        CHECK(std::abs(inner_product(f, h)) < 1e-12);
    }
    SUBCASE("matches Kahan oracle on noise") {
        const Field f = random_field(g, 2, 1);
        const Field h = random_field(g, 2, 2);
        CHECK(std::abs(inner_product(f, h) - kahan_inner(f, h)) < 1e-14);
    }
    SUBCASE("shape mismatch") {
        const Field f(g, 1), h(g, 2);
        CHECK_THROWS(inner_product(f, h));
    }
}

TEST_CASE("rel_l2_error") {
    const Grid2D g(32, 32);
    const Field truth = random_field(g, 1, 9);
    SUBCASE("identity gives zero") { CHECK(rel_l2_error(truth, truth) == 0.0); }
    SUBCASE("zero prediction gives one") {
        const Field zero(g, 1, 0.0);
        CHECK(rel_l2_error(zero, truth) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("doubled truth gives one") {
        Field two = truth;
        for (double& v : two.data) v *= 2.0;
        CHECK(rel_l2_error(two, truth) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("scale covariance: rel error of alpha*truth is |alpha - 1|") {
        for (double alpha : {0.25, 0.5, 1.5, 3.0, -1.0}) {
            Field scaled = truth;
            for (double& v : scaled.data) v *= alpha;
            CHECK(rel_l2_error(scaled, truth) ==
                  doctest::Approx(std::abs(alpha - 1.0)).epsilon(1e-13));
        }
    }
    SUBCASE("degenerate reference is rejected") {
        const Field zero(g, 1, 0.0);
        CHECK_THROWS_WITH_AS(rel_l2_error(truth, zero),
                             doctest::Contains("degenerate reference"), std::invalid_argument);
    }
}

TEST_CASE("mean equals inner product against the constant one over the area") {
    const Grid2D g(32, 64, 2.0, 3.0);
    const Field f = random_field(g, 1, 77);
    const Field ones(g, 1, 1.0);
    const double lhs = mean_over_domain(f)[0];
    const double rhs = inner_product(f, ones) / g.area();
    CHECK(std::abs(lhs - rhs) < 1e-13);
}

TEST_CASE("operations are pure") {
    const Grid2D g(16, 16);
    const Field f = random_field(g, 2, 5);
    const Field h = random_field(g, 2, 6);
    const std::vector<double> fd = f.data, hd = h.data;
    (void)mean_over_domain(f);
    (void)inner_product(f, h);
    (void)rel_l2_error(f, h);
    (void)coords_field(g);
    CHECK(f.data == fd);
    CHECK(h.data == hd);
}
