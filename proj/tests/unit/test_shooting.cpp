#include <doctest.h>

#include <cmath>

#include "multibump/classifier.hpp"
#include "multibump/errors.hpp"
#include "multibump/newton.hpp"
#include "multibump/shooting.hpp"

using namespace multibump;

namespace {

const Weight& sine3() {
    static const Weight w = Weight::build(WeightSpec::sin_multibump(3));
    return w;
}

const SolutionSet& n2_at_80() {
    static const SolutionSet s = enumerate_solutions(-80, sine3(), 3, ScanOptions{});
    return s;
}

}  // namespace

TEST_SUITE("shooting") {

TEST_CASE("linear regime matches the closed form") {
    ShootingField f;
    f.lambda = -40;
    for (double s : {1e-9, 1e-7}) {
        ShootingOutcome o = integrate_ivp(sine3(), f, s, ShootingCaps{});
        const double k = std::sqrt(40.0);
        CHECK_FALSE(o.blew_up);
        CHECK(o.terminal > 0);
        CHECK(o.terminal == doctest::Approx(s * std::sinh(k) / k).epsilon(1e-6));
    }
}

TEST_CASE("zero slope stays at rest") {
    ShootingField f;
    f.lambda = -40;
    ShootingOutcome o = integrate_ivp(sine3(), f, 0.0, ShootingCaps{});
    CHECK(o.terminal == 0.0);
    CHECK_FALSE(o.blew_up);
}

TEST_CASE("blow-up is reported with a signed sentinel") {
    // Large slopes carry u into a negativity interval, where u'' ~ |a| u^p
    // escapes to infinity.
    const SolutionSet& set = n2_at_80();
    const ScanSample* hit = nullptr;
    for (const ScanSample& r : set.scan)
        if (r.blew_up) {
            hit = &r;
            break;
        }
    REQUIRE(hit != nullptr);
    CHECK(std::isinf(hit->terminal));
    ShootingField f;
    f.lambda = -80;
    ShootingOutcome o = integrate_ivp(sine3(), f, hit->s, ShootingCaps{});
    CHECK(o.blew_up);
    CHECK(o.fate == Fate::BlownUp);
    CHECK(o.terminal == hit->terminal);
    CHECK(o.event_x > sine3().pattern().tau[0]);
}

TEST_CASE("refined zeros at lambda = -40 are admissible") {
    Grid g(2049, 1.0);
    ScanOptions opts;
    opts.grid = g;
    SolutionSet set = enumerate_solutions(-40, sine3(), 3, opts);
    REQUIRE(set.size() >= 1);
    ShootingField f;
    f.lambda = -40;
    for (std::size_t k = 0; k < set.size(); ++k) {
        ShootingOutcome o = integrate_ivp(sine3(), f, set.slopes[k], ShootingCaps{});
        CHECK(std::abs(o.terminal) <= 1e-8 * std::max(1.0, set.slopes[k]));
        CHECK(set.profiles[k].min_value() >= -1e-9);
    }
}

TEST_CASE("two humps at lambda = -80 give three solutions above the lower bound") {
    const SolutionSet& set = n2_at_80();
    CHECK(set.size() >= 3);
    const double r = r_lambda(-80, 1.0, 3);
    for (std::size_t a = 0; a < set.size(); ++a) {
        CHECK(set.profiles[a].sup_norm() > r);
        CHECK(std::abs(set.indices[a]) == 1);
        for (std::size_t b = a + 1; b < set.size(); ++b)
            CHECK(sup_distance(set.profiles[a], set.profiles[b]) >= ScanOptions{}.dedup_tol);
    }
}

TEST_CASE("shooting and Newton agree") {
    Grid g(2049, 1.0);
    NewtonSolutionSet newton = solve_all(-80, sine3(), 3, NewtonConfig{}, g, ClassifierConfig{});
    for (const GridProfile& s : n2_at_80().profiles) {
        double best = 1e300;
        for (const GridProfile& p : newton.profiles)
            best = std::min(best, sup_distance(s, richardson_extrapolate(p, sine3(), 3, NewtonConfig{})));
        CHECK(best <= 1e-5);
    }
}

TEST_CASE("count is stable under a four times finer scan") {
    for (double lambda : {-40.0, -160.0}) {
        ScanOptions coarse, fine;
        fine.points_per_decade *= 4;
        fine.uniform_points *= 4;
        CHECK(enumerate_solutions(lambda, sine3(), 3, fine).size() ==
              enumerate_solutions(lambda, sine3(), 3, coarse).size());
    }
}

TEST_CASE("sign coherence of the scan between zeros") {
    const SolutionSet& set = n2_at_80();
    int changes = 0;
    for (std::size_t k = 1; k < set.scan.size(); ++k) {
        double a = set.scan[k - 1].terminal, b = set.scan[k].terminal;
        if ((a > 0) != (b > 0) && a != 0 && b != 0) ++changes;
    }
    // every sign change of the sampled shooting function is accounted for
    CHECK(changes >= static_cast<int>(set.size()));
}

TEST_CASE("degree table for two humps") {
    const SignPattern& pat = sine3().pattern();
    ClassifierConfig cfg;
    const SolutionSet& set = n2_at_80();
    int orientation = calibrate_orientation(set, pat, cfg);
    CHECK(box_degree(set, pat, IndexSet{}, cfg, orientation) == 1);
    CHECK(box_degree(set, pat, IndexSet{1}, cfg, orientation) == -1);
    CHECK(box_degree(set, pat, IndexSet{2}, cfg, orientation) == -1);
    CHECK(box_degree(set, pat, IndexSet{1, 2}, cfg, orientation) == 1);

    DegreeTable t = degree_table(set, sine3(), 3, 1.0);
    CHECK(t.pass);
    for (const auto& [s, d] : t.omega_boxes)
        if (!s.empty()) CHECK(d == 0);
    for (const auto& [s, d] : t.lambda_boxes) CHECK(d == (s.cardinality() % 2 == 0 ? 1 : -1));
    int total = 0;
    for (const auto& [s, n] : t.occupancy) total += n;
    CHECK(total == static_cast<int>(set.size()) + 1);
}

TEST_CASE("degree on a box boundary is refused") {
    const SolutionSet& set = n2_at_80();
    ClassifierConfig cfg;
    cfg.rho = per_interval_sups(set.profiles[0], sine3().pattern())[0];
    CHECK_THROWS_AS(box_degree(set, sine3().pattern(), IndexSet{1}, cfg, 1), Error);
}

TEST_CASE("preconditions") {
    CHECK_THROWS_AS(enumerate_solutions(5.0, sine3(), 3, ScanOptions{}), Error);
    CHECK_THROWS_AS(enumerate_solutions(-5.0, sine3(), 1.0, ScanOptions{}), Error);
}

}
