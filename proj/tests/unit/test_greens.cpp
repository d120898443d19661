#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "multibump/errors.hpp"
#include "multibump/greens.hpp"
#include "multibump/newton.hpp"

using namespace multibump;

namespace {

constexpr double pi = std::numbers::pi;

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Error of apply_K against the analytic solution of -u'' = f on [0, 1] with
// f(x) = e^x, u(x) = 1 + (e - 1) x - e^x.
double apply_K_error(int N) {
    Grid g(N, 1.0);
    std::vector<double> f(g.size()), exact(g.size());
    for (int j = 0; j < g.size(); ++j) {
        double x = g.x(j);
        f[j] = std::exp(x);
        exact[j] = 1 + (std::numbers::e - 1) * x - std::exp(x);
    }
    return max_abs_diff(apply_K(g, f), exact);
}

}  // namespace

TEST_SUITE("greens") {

TEST_CASE("kernel values") {
    for (double y : {0.0, 0.3, 1.0}) CHECK(kernel(0.0, y, 1.0) == 0.0);
    for (double x : {0.1, 0.5, 0.9}) CHECK(kernel(x, x, 1.0) == doctest::Approx(x * (1 - x)));
    CHECK(kernel(0.25, 0.75, 1.0) == doctest::Approx(0.0625));
}

TEST_CASE("kernel is symmetric and non-negative") {
    std::mt19937_64 rng(5);
    for (double L : {1.0, 2.0, 0.5}) {
        std::uniform_real_distribution<double> U(0.0, L);
        for (int k = 0; k < 1000; ++k) {
            double x = U(rng), y = U(rng);
            CHECK(kernel(x, y, L) == doctest::Approx(kernel(y, x, L)).epsilon(1e-14));
            CHECK(kernel(x, y, L) >= 0.0);
        }
    }
}

TEST_CASE("kernel inverts the second derivative for general L") {
    // u = int K f dy with f = 1 on [0, L] is x (L - x) / 2
    const double L = 2.0;
    Grid g(999, L);
    std::vector<double> one(g.size(), 1.0);
    auto u = apply_K(g, one);
    for (int j = 0; j < g.size(); j += 50) CHECK(u[j] == doctest::Approx(g.x(j) * (L - g.x(j)) / 2).epsilon(1e-9));
}

TEST_CASE("apply_K of constants and zero") {
    Grid g(127, 1.0);
    std::vector<double> one(g.size(), 1.0), zero(g.size(), 0.0);
    auto u = apply_K(g, one);
    double err = 0;
    for (int j = 0; j < g.size(); ++j) err = std::max(err, std::abs(u[j] - g.x(j) * (1 - g.x(j)) / 2));
    CHECK(err <= g.h() * g.h());
    for (double v : apply_K(g, zero)) CHECK(v == 0.0);
    CHECK(u.front() == 0.0);
    CHECK(u.back() == 0.0);
}

TEST_CASE("apply_K converges at second order") {
    double e1 = apply_K_error(63), e2 = apply_K_error(127), e3 = apply_K_error(255);
    double o1 = std::log2(e1 / e2), o2 = std::log2(e2 / e3);
    CHECK(o1 >= 1.9);
    CHECK(o1 <= 2.1);
    CHECK(o2 >= 1.9);
    CHECK(o2 <= 2.1);
}

TEST_CASE("principal eigenfunction is mapped to phi / Sigma1") {
    Grid g(255, 1.0);
    Eigenpair e = principal_eigenpair(g);
    CHECK(e.sigma1 == doctest::Approx(pi * pi));
    auto u = apply_K(g, e.phi);
    double err = 0;
    for (int j = 0; j < g.size(); ++j) err = std::max(err, std::abs(u[j] - e.phi[j] / e.sigma1));
    CHECK(err <= g.h() * g.h());
}

TEST_CASE("trapezoid rule") {
    Grid g(511, 1.0);
    std::vector<double> s(g.size());
    for (int j = 0; j < g.size(); ++j) s[j] = std::sin(pi * g.x(j));
    CHECK(trapezoid(g, s) == doctest::Approx(2 / pi).epsilon(1e-5));
}

TEST_CASE("fixed-point map") {
    Weight w = Weight::build(WeightSpec::sin_multibump(3));
    Grid g(2049, 1.0);
    std::vector<double> zero(g.size(), 0.0);
    for (double v : apply_Phi(g, w, -80, 3, zero)) CHECK(v == 0.0);

    SUBCASE("small multiple of phi at the principal eigenvalue") {
        Eigenpair e = principal_eigenpair(g);
        const double eps = 1e-4;
        std::vector<double> u(g.size());
        for (int j = 0; j < g.size(); ++j) u[j] = eps * e.phi[j];
        auto phi_u = apply_Phi(g, w, e.sigma1, 3, u);
        double d = max_abs_diff(u, phi_u);
        CHECK(d <= 10 * (std::pow(eps, 3) + eps * g.h() * g.h()));
    }

    SUBCASE("Newton solution is a fixed point") {
        auto seed = seed_profile(g, IndexSet{1}, w, -80, 2 * std::sqrt(80.0));
        NewtonResult r = newton_solve(g, -80, w, 3, seed, NewtonConfig{});
        REQUIRE(r.converged);
        CHECK(max_abs_diff(r.profile.values, apply_Phi(g, w, -80, 3, r.profile.values)) <= 1e-6);
    }

    SUBCASE("magnitude guard") {
        std::vector<double> big(g.size(), 0.0);
        big[10] = 1e13;
        CHECK_THROWS_AS(apply_Phi(g, w, -80, 3, big), Error);
    }
}

TEST_CASE("homotopies reduce to the map at their endpoints") {
    Weight w = Weight::build(WeightSpec::sin_multibump(3));
    Grid g(257, 1.0);
    std::vector<double> u(g.size());
    for (int j = 0; j < g.size(); ++j) u[j] = 3 * std::sin(pi * g.x(j)) * std::cos(2 * g.x(j));
    auto phi = apply_Phi(g, w, -40, 3, u);
    BumpWeight bump(w, IndexSet{1});
    CHECK(apply_homotopy(g, w, -40, 3, ThetaHomotopy{1.0}, u) == phi);
    CHECK(apply_homotopy(g, w, -40, 3, MuHomotopy{0.0, &bump}, u) == phi);
    for (double v : apply_homotopy(g, w, -40, 3, ThetaHomotopy{0.0}, u)) CHECK(v == 0.0);
}

TEST_CASE("bump weight is supported on the chosen humps") {
    Weight w = Weight::build(WeightSpec::sin_multibump(5));
    BumpWeight b(w, IndexSet{2});
    CHECK(b(0.1) == 0.0);
    CHECK(b(0.9) == 0.0);
    CHECK(b(0.5) > 0.0);
    CHECK(b(0.5) == doctest::Approx(0.1).epsilon(0.05));
}

}
