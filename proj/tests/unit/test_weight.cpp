#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "multibump/errors.hpp"
#include "multibump/weight.hpp"

using namespace multibump;

namespace {

void check_sign_consistency(const Weight& w, std::uint64_t seed) {
    const SignPattern& pat = w.pattern();
    std::mt19937_64 rng(seed);
    for (int i = 0; i < pat.n; ++i) {
        std::uniform_real_distribution<double> in(pat.sigma[i], pat.tau[i]);
        for (int k = 0; k < 1000; ++k) {
            double x = in(rng);
            if (x == pat.sigma[i] || x == pat.tau[i]) continue;
            REQUIRE(w(x) > 0.0);
        }
        if (i + 1 < pat.n) {
            std::uniform_real_distribution<double> gap(pat.tau[i], pat.sigma[i + 1]);
            for (int k = 0; k < 1000; ++k) {
                double x = gap(rng);
                if (x == pat.tau[i] || x == pat.sigma[i + 1]) continue;
                REQUIRE(w(x) < 0.0);
            }
        }
    }
}

}  // namespace

TEST_SUITE("weight") {

TEST_CASE("three-hump sine has two positivity intervals") {
    Weight w = Weight::build(WeightSpec::sin_multibump(3));
    const SignPattern& pat = w.pattern();
    REQUIRE(pat.n == 2);
    CHECK(pat.sigma[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(pat.tau[0] == doctest::Approx(1.0 / 3).epsilon(1e-10));
    CHECK(pat.sigma[1] == doctest::Approx(2.0 / 3).epsilon(1e-10));
    CHECK(pat.tau[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.sup_norm() == doctest::Approx(1.0));
}

TEST_CASE("five-hump sine has three positivity intervals") {
    Weight w = Weight::build(WeightSpec::sin_multibump(5));
    const SignPattern& pat = w.pattern();
    REQUIRE(pat.n == 3);
    const double sigma[] = {0.0, 0.4, 0.8}, tau[] = {0.2, 0.6, 1.0};
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(pat.sigma[i] - sigma[i]) < 1e-10);
        CHECK(std::abs(pat.tau[i] - tau[i]) < 1e-10);
    }
}

TEST_CASE("edge exponents of the sine are one") {
    Weight w = Weight::build(WeightSpec::sin_multibump(3));
    const SignPattern& pat = w.pattern();
    for (int i = 0; i < pat.n; ++i) {
        CHECK(std::abs(pat.gamma[i] - 1.0) < 0.05);
        // independent log-log slope of |a| against the distance to the left edge
        const double d1 = 1e-4, d2 = 1e-2;
        const double e = pat.sigma[i];
        double slope = std::log(std::abs(w(e + d2)) / std::abs(w(e + d1))) / std::log(d2 / d1);
        CHECK(std::abs(slope - 1.0) < 0.05);
    }
}

TEST_CASE("pointwise values") {
    Weight w = Weight::build(WeightSpec::sin_multibump(3));
    CHECK(w.eval(1.0 / 6) == doctest::Approx(1.0));
    CHECK(w.eval(0.5) == doctest::Approx(-1.0));
    CHECK(std::abs(w.eval(1.0 / 3)) < 1e-15);
    CHECK_THROWS_AS(w.eval(1.5), Error);
    CHECK_THROWS_AS(w.eval(-0.1), Error);
}

TEST_CASE("sign consistency on random points") {
    check_sign_consistency(Weight::build(WeightSpec::sin_multibump(3)), 1);
    check_sign_consistency(Weight::build(WeightSpec::sin_multibump(5)), 2);
    check_sign_consistency(Weight::build(WeightSpec::sin_multibump(7, 2.5)), 3);
}

TEST_CASE("piecewise power weight") {
    WeightSpec s;
    s.kind = WeightKind::PiecewisePower;
    s.length = 1.0;
    s.sigma = {0.1, 0.6};
    s.tau = {0.4, 0.9};
    s.gamma = {1.0, 2.0};
    s.coeff = {1.0, 3.0};
    s.depth = {1.0, 2.0, 1.0};
    Weight w = Weight::build(s);
    const SignPattern& pat = w.pattern();
    REQUIRE(pat.n == 2);
    CHECK(std::abs(pat.sigma[0] - 0.1) < 1e-10);
    CHECK(std::abs(pat.tau[1] - 0.9) < 1e-10);
    CHECK(std::abs(pat.gamma[0] - 1.0) < 0.05);
    CHECK(std::abs(pat.gamma[1] - 2.0) < 0.05);
    CHECK(w(0.25) == doctest::Approx(0.15));
    CHECK(w(0.75) == doctest::Approx(3.0 * 0.15 * 0.15));
    CHECK(w(0.5) == doctest::Approx(-2.0));
    check_sign_consistency(w, 4);
}

TEST_CASE("tabulated weight recovers the sampled sign pattern") {
    WeightSpec s;
    s.kind = WeightKind::Tabulated;
    const int n = 301;
    for (int k = 0; k < n; ++k) {
        double x = static_cast<double>(k) / (n - 1);
        s.xs.push_back(x);
        s.as.push_back(std::sin(3 * std::numbers::pi * x));
    }
    Weight w = Weight::build(s);
    REQUIRE(w.pattern().n == 2);
    CHECK(std::abs(w.pattern().tau[0] - 1.0 / 3) < 1e-3);
    CHECK(std::abs(w.pattern().sigma[1] - 2.0 / 3) < 1e-3);
}

TEST_CASE("invalid specifications are rejected") {
    CHECK_THROWS_AS(Weight::build(WeightSpec::sin_multibump(2)), Error);
    CHECK_THROWS_AS(Weight::build(WeightSpec::sin_multibump(3, -1.0)), Error);

    WeightSpec t;
    t.kind = WeightKind::Tabulated;
    t.xs = {0.0, 0.5, 1.0};
    t.as = {0.0, 1.0, 0.0};
    CHECK_THROWS_AS(Weight::build(t), Error);

    WeightSpec p;
    p.kind = WeightKind::PiecewisePower;
    p.sigma = {0.5};
    p.tau = {0.4};
    p.gamma = {1.0};
    p.coeff = {1.0};
    p.depth = {1.0, 1.0};
    CHECK_THROWS_AS(Weight::build(p), Error);
    p.tau = {0.7};
    p.depth = {1.0};
    CHECK_THROWS_AS(Weight::build(p), Error);  // two negativity intervals need two depths
}

}
