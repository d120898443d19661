#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "multibump/classifier.hpp"
#include "multibump/errors.hpp"

using namespace multibump;

namespace {

const Weight& sine3() {
    static const Weight w = Weight::build(WeightSpec::sin_multibump(3));
    return w;
}

// Profile whose sup over hump i is heights[i], as a sum of sine bumps.
GridProfile bumps(const Grid& g, const Weight& w, const std::vector<double>& heights) {
    GridProfile p{g, std::vector<double>(g.size(), 0.0), -80};
    const SignPattern& pat = w.pattern();
    for (int i = 0; i < pat.n; ++i)
        for (int j = 0; j < g.size(); ++j) {
            double x = g.x(j);
            if (x >= pat.sigma[i] && x <= pat.tau[i])
                p.values[j] += heights[i] * std::sin(std::numbers::pi * (x - pat.sigma[i]) / (pat.tau[i] - pat.sigma[i]));
        }
    return p;
}

std::vector<SolutionSet> n2_sweep() {
    static const std::vector<SolutionSet> sweep = [] {
        std::vector<double> grid{-10, -20, -40, -80, -160, -320};
        return sweep_solutions(grid, sine3(), 3, ScanOptions{});
    }();
    return sweep;
}

}  // namespace

TEST_SUITE("classifier") {

TEST_CASE("lower bound formula") {
    CHECK(r_lambda(-4, 1, 3) == doctest::Approx(2.0));
    for (double p : {1.5, 2.0, 3.0, 7.0}) CHECK(r_lambda(-2.5, 2.5, p) == doctest::Approx(1.0));
    CHECK(r_lambda(-1, 1, 3) < r_lambda(-10, 1, 3));
    CHECK(r_lambda(-10, 1, 3) < r_lambda(-100, 1, 3));
}

TEST_CASE("formulas agree with an extended-precision evaluation") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> lam(-500, -0.1), a(0.1, 5), pp(1.1, 6), R(0.5, 50), L(0.2, 4), wphi(0.001, 1);
    for (int k = 0; k < 20; ++k) {
        const double l = lam(rng), na = a(rng), p = pp(rng), r = R(rng), len = L(rng), wp = wphi(rng);
        long double ref_r = std::pow(static_cast<long double>(-l) / na, 1.0L / (p - 1));
        CHECK(std::abs(r_lambda(l, na, p) - ref_r) <= 1e-12L * ref_r);
        const long double pi = 3.141592653589793238462643383279502884L;
        long double s1 = pi * pi / (static_cast<long double>(len) * len);
        long double ref_mu = ((s1 - l) + na * std::pow(static_cast<long double>(r), static_cast<long double>(p) - 1)) *
                             len * r / wp;
        CHECK(std::abs(mu_star_formula(l, r, na, p, len, wp) - ref_mu) <= 1e-12L * ref_mu);
    }
}

TEST_CASE("threshold for the forced problem") {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    CHECK(mu_star_formula(-80, 10, 1, 3, 1, 0.05) == doctest::Approx((pi2 + 80 + 100) * 10 / 0.05));
    CHECK(mu_star_formula(-80, 10, 1, 3, 1, 0.1) == doctest::Approx(mu_star_formula(-80, 10, 1, 3, 1, 0.05) / 2));
}

TEST_CASE("classification by per-hump sups") {
    Grid g(513, 1.0);
    ClassifierConfig cfg;
    CHECK(classify(bumps(g, sine3(), {5.0, 0.1}), sine3().pattern(), cfg) == IndexSet{1});
    CHECK(classify(bumps(g, sine3(), {0.1, 5.0}), sine3().pattern(), cfg) == IndexSet{2});
    CHECK(classify(bumps(g, sine3(), {5.0, 5.0}), sine3().pattern(), cfg) == IndexSet{1, 2});
    CHECK(classify(GridProfile{g, std::vector<double>(g.size(), 0.0), -80}, sine3().pattern(), cfg) == IndexSet{});
}

TEST_CASE("dead band and radius are enforced") {
    Grid g(513, 1.0);
    ClassifierConfig cfg;
    GridProfile on_band = bumps(g, sine3(), {5.0, 0.1});
    cfg.rho = per_interval_sups(on_band, sine3().pattern())[0];
    CHECK_THROWS_WITH_AS(classify(on_band, sine3().pattern(), cfg), doctest::Contains(""), Error);
    ClassifierConfig capped;
    capped.r_cap = 4.0;
    CHECK_THROWS_AS(classify(on_band, sine3().pattern(), capped), Error);
}

TEST_CASE("boxes are disjoint") {
    Grid g(257, 1.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> H(0.0, 4.0);
    ClassifierConfig cfg;
    for (int k = 0; k < 200; ++k) {
        GridProfile p = bumps(g, sine3(), {H(rng), H(rng)});
        IndexSet s;
        try {
            s = classify(p, sine3().pattern(), cfg);
        } catch (const Error&) {
            continue;
        }
        auto sups = per_interval_sups(p, sine3().pattern());
        int matches = 0;
        for (const IndexSet& cand : all_index_sets(2)) {
            bool in = true;
            for (int i = 1; i <= 2; ++i) in = in && ((sups[i - 1] > cfg.rho) == cand.contains(i));
            matches += in;
        }
        CHECK(matches == 1);
    }
}

TEST_CASE("lower bound report") {
    std::vector<double> thetas{0.25, 0.5, 0.75, 1.0};
    VerificationReport r = verify_lower_bound(-80, thetas, sine3(), 3, ScanOptions{});
    CHECK(r.pass());
    CHECK(r.margins.at("min_norm_minus_r") > 0);

    double prev = -1;
    for (double lambda : {-40.0, -80.0, -160.0}) {
        std::vector<double> one{1.0};
        VerificationReport s = verify_lower_bound(lambda, one, sine3(), 3, ScanOptions{});
        CHECK(s.pass());
        CHECK(s.margins.at("min_norm_minus_r") > prev);
        prev = s.margins.at("min_norm_minus_r");
    }
}

TEST_CASE("dichotomy threshold") {
    auto sweep = n2_sweep();
    VerificationReport r1 = verify_dichotomy(1.0, sweep, sine3(), 3);
    REQUIRE(r1.pass());
    double hat1 = r1.thresholds.at("lambda_hat");
    CHECK(hat1 <= -10);
    CHECK(hat1 >= -400);
    VerificationReport r10 = verify_dichotomy(10.0, sweep, sine3(), 3);
    if (r10.pass()) CHECK(r10.thresholds.at("lambda_hat") <= hat1);
}

TEST_CASE("decay threshold is monotone in delta") {
    auto sweep = n2_sweep();
    std::vector<std::pair<double, double>> K{{0.4, 0.6}};
    VerificationReport a = verify_decay(sweep, K, 2.0, sine3(), 3);
    VerificationReport b = verify_decay(sweep, K, 1.0, sine3(), 3);
    REQUIRE(a.pass());
    if (b.pass()) CHECK(b.thresholds.at("lambda_delta") <= a.thresholds.at("lambda_delta"));
    // peaks over K shrink along the grid
    for (std::size_t k = 1; k < a.rows.size(); ++k)
        CHECK(a.rows[k].values.at("max_on_K") < a.rows[k - 1].values.at("max_on_K"));
}

TEST_CASE("threshold discovery") {
    auto sweep = n2_sweep();
    auto star = discover_lambda_star(sweep, sine3(), 3, 1.0);
    REQUIRE(star);
    CHECK(1.0 < r_lambda(*star, 1.0, 3));
    CHECK(lower_bound_violations(sweep[3].profiles, r_lambda(-80, 1, 3)) == 0);
    CHECK(r_cap_from(sweep[3]) == doctest::Approx(1.5 * sweep[3].profiles[0].sup_norm()).epsilon(0.05));
}

}
