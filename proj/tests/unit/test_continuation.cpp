#include <doctest.h>

#include <cmath>
#include <numbers>

#include "multibump/classifier.hpp"
#include "multibump/continuation.hpp"
#include "multibump/greens.hpp"
#include "multibump/newton.hpp"

using namespace multibump;

namespace {

const Weight& sine3() {
    static const Weight w = Weight::build(WeightSpec::sin_multibump(3));
    return w;
}

const Grid kGrid(257, 1.0);

// Smallest eigenvalue of the discrete Dirichlet Laplacian on kGrid.
double discrete_sigma1() {
    const double h = kGrid.h();
    return 4 / (h * h) * std::pow(std::sin(std::numbers::pi * h / 2), 2);
}

const Branch& branch() {
    static const Branch b = [] {
        BranchPoint seed = init_branch(sine3(), 3, 1e-4, kGrid);
        return continue_branch(sine3(), 3, seed, ContinuationConfig{}, kGrid);
    }();
    return b;
}

}  // namespace

TEST_SUITE("continuation") {

TEST_CASE("synthetic fold") {
    std::vector<double> s, l;
    for (int k = 0; k <= 40; ++k) {
        double t = 0.05 * k + 0.013;
        s.push_back(t);
        l.push_back(1 - (t - 1) * (t - 1));
    }
    auto tp = detect_turning_point(s, l);
    REQUIRE(tp);
    CHECK(std::abs(tp->lambda_t - 1.0) <= 1e-6);
}

TEST_CASE("monotone branch has no fold") {
    std::vector<double> s, l;
    for (int k = 0; k < 20; ++k) {
        s.push_back(k);
        l.push_back(5 - 0.3 * k);
    }
    CHECK_FALSE(detect_turning_point(s, l));
}

TEST_CASE("seed point near the bifurcation") {
    BranchPoint p = init_branch(sine3(), 3, 1e-4, kGrid);
    CHECK(std::abs(p.lambda - std::numbers::pi * std::numbers::pi) <= 1e-2);
    Eigenpair e = principal_eigenpair(kGrid);
    double dev = 0;
    for (int j = 0; j < kGrid.size(); ++j) dev = std::max(dev, std::abs(p.profile.values[j] - 1e-4 * e.phi[j]));
    CHECK(dev <= 0.1 * 1e-4);

    // tangency: the discrete bifurcation point is approached as eps shrinks
    const double target = discrete_sigma1();
    double prev = std::abs(init_branch(sine3(), 3, 1e-2, kGrid).lambda - target);
    for (double eps : {1e-3, 1e-4, 1e-5}) {
        double d = std::abs(init_branch(sine3(), 3, eps, kGrid).lambda - target);
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("traced branch") {
    const Branch& b = branch();
    REQUIRE(b.points.size() > 20);
    for (std::size_t k = 1; k < 10; ++k) CHECK(b.points[k].amplitude > b.points[k - 1].amplitude);
    for (const BranchPoint& p : b.points)
        CHECK(max_norm(fd_residual(kGrid, p.lambda, p.profile.values, sine3(), 3)) <= 1e-9);

    REQUIRE(b.fold);
    CHECK(b.fold->lambda_t > std::numbers::pi * std::numbers::pi);
    // the fold is where lambda stops increasing
    const std::size_t f = b.fold->index;
    CHECK(std::abs(b.points[f].lambda - b.fold->lambda_t) < 0.1);

    CHECK(b.lambda_lo <= -80);
    auto at = point_at_lambda(b, -80, sine3(), 3);
    REQUIRE(at);
    CHECK(at->sup_norm() > r_lambda(-80, 1, 3));

    ContinuationConfig cfg;
    for (std::size_t k = 1; k < b.points.size(); ++k)
        CHECK(std::abs(b.points[k].lambda - b.points[k - 1].lambda) <= cfg.h_max + 1e-12);
}

TEST_CASE("branch meets a multistart solution") {
    auto at = point_at_lambda(branch(), -80, sine3(), 3);
    REQUIRE(at);
    NewtonSolutionSet set = solve_all(-80, sine3(), 3, NewtonConfig{}, kGrid, ClassifierConfig{});
    double best = 1e300;
    for (const GridProfile& p : set.profiles) best = std::min(best, sup_distance(*at, p));
    CHECK(best <= 1e-4);
}

}
