#include <catch2/catch.hpp>

#include "oracles.hpp"
#include "rswarm/random.hpp"
#include "rswarm/sigmoid.hpp"

using namespace rswarm;

TEST_CASE("smooth step basics") {
    SECTION("exactly zero at the origin") {
        for (double s : {0.1, 1.0, 5.0, 20.0})
            for (double q : {0.01, 0.5, 0.99}) REQUIRE(sigmoid(0.0, s, q) == 0.0);
    }
    SECTION("sign matches the argument") {
        REQUIRE(sigmoid(0.3, 5.0, 0.5) > 0.0);
        REQUIRE(sigmoid(-0.3, 5.0, 0.5) < 0.0);
    }
    SECTION("range stays inside (-q, 1) even at extreme arguments") {
        for (double q : {0.1, 0.5, 0.9}) {
            REQUIRE(sigmoid(1e9, 20.0, q) < 1.0);
            REQUIRE(sigmoid(-1e9, 20.0, q) > -q);
        }
    }
    SECTION("strictly below the hard step") {
        Rng rng(31);
        for (int k = 0; k < 1000; ++k) {
            const double y = rng.uniform(-10.0, 10.0);
            const double s = rng.uniform(1e-9, 20.0);
            const double q = rng.uniform(1e-9, 1.0 - 1e-9);
            REQUIRE(sigmoid(y, s, q) < heaviside(y));
        }
    }
    SECTION("nondecreasing") {
        Rng rng(37);
        for (int k = 0; k < 200; ++k) {
            const double s = rng.uniform(0.5, 10.0);
            const double q = rng.uniform(0.1, 0.9);
            double a = rng.uniform(-5.0, 5.0);
            double b = rng.uniform(-5.0, 5.0);
            if (a > b) std::swap(a, b);
            REQUIRE(sigmoid(a, s, q) <= sigmoid(b, s, q));
        }
    }
}

TEST_CASE("smooth step derivatives") {
    Rng rng(41);
    SECTION("first derivative is positive and matches finite differences") {
        for (int k = 0; k < 300; ++k) {
            const double y = rng.uniform(-10.0, 10.0);
            const double s = rng.uniform(0.1, 20.0);
            const double q = rng.uniform(0.05, 0.95);
            const double d = sigmoid_deriv(y, s, q);
            REQUIRE(d > 0.0);
            const double h = 1e-6;
            const double fd = (sigmoid(y + h, s, q) - sigmoid(y - h, s, q)) / (2.0 * h);
            REQUIRE(oracles::rel_err(d, fd) < 1e-7);
        }
    }
    SECTION("second derivative matches finite differences of the first") {
        for (int k = 0; k < 300; ++k) {
            const double y = rng.uniform(-5.0, 5.0);
            const double s = rng.uniform(0.1, 10.0);
            const double q = rng.uniform(0.05, 0.95);
            const double h = 1e-6;
            const double fd = (sigmoid_deriv(y + h, s, q) - sigmoid_deriv(y - h, s, q)) / (2.0 * h);
            REQUIRE(oracles::rel_err(sigmoid_second_deriv(y, s, q), fd) < 1e-6);
        }
    }
}
