#include "multibump/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "multibump/errors.hpp"

namespace multibump {

double r_lambda(double lambda, double sup_norm_a, double p) {
    if (!(lambda < 0)) throw spec_error("r_lambda requires lambda < 0");
    if (!(sup_norm_a > 0)) throw spec_error("r_lambda requires |a|_inf > 0");
    if (!(p > 1)) throw spec_error("r_lambda requires p > 1");
    return std::pow(-lambda / sup_norm_a, 1.0 / (p - 1.0));
}

double mu_star_formula(double lambda, double r_cap, double sup_norm_a, double p, double length, double w_phi) {
    if (!(r_cap > 0) || !(w_phi > 0) || !(length > 0)) throw spec_error("mu_star requires R > 0 and int w phi > 0");
    const double sigma1 = std::pow(std::numbers::pi / length, 2);
    return ((sigma1 - lambda) + sup_norm_a * std::pow(r_cap, p - 1.0)) * length * r_cap / w_phi;
}

double mu_star(double lambda, double r_cap, const Weight& weight, const BumpWeight& w, double p, const Grid& grid) {
    if (grid.L != weight.length()) throw spec_error("grid length differs from the weight's domain");
    Eigenpair e = principal_eigenpair(grid);
    std::vector<double> ws = w.samples(grid);
    for (std::size_t j = 0; j < ws.size(); ++j) ws[j] *= e.phi[j];
    return mu_star_formula(lambda, r_cap, weight.sup_norm(), p, weight.length(), trapezoid(grid, ws));
}

std::vector<double> per_interval_sups(const GridProfile& profile, const SignPattern& pattern) {
    std::vector<double> s(pattern.n);
    for (int i = 0; i < pattern.n; ++i) s[i] = profile.sup_on(pattern.sigma[i], pattern.tau[i]);
    return s;
}

IndexSet classify(const GridProfile& profile, const SignPattern& pattern, const ClassifierConfig& cfg) {
    if (!(cfg.rho > 0)) throw spec_error("rho must be positive");
    if (profile.sup_norm() >= cfg.r_cap)
        throw verification_failure("OUT_OF_BOX", "profile norm " + std::to_string(profile.sup_norm()) +
                                                     " is not below R = " + std::to_string(cfg.r_cap));
    std::vector<int> members;
    auto sups = per_interval_sups(profile, pattern);
    for (int i = 0; i < pattern.n; ++i) {
        if (std::abs(sups[i] - cfg.rho) <= cfg.margin * cfg.rho)
            throw verification_failure("BAND_HIT", "sup over interval " + std::to_string(i + 1) + " is " +
                                                       std::to_string(sups[i]) + ", inside the dead band");
        if (sups[i] > cfg.rho) members.push_back(i + 1);
    }
    return IndexSet(std::move(members));
}

std::string to_string(ReportStatus s) {
    switch (s) {
    case ReportStatus::Pass: return "PASS";
    case ReportStatus::Fail: return "FAIL";
    case ReportStatus::Inconclusive: return "INCONCLUSIVE";
    }
    return "FAIL";
}

int lower_bound_violations(std::span<const GridProfile> profiles, double r) {
    int n = 0;
    for (const auto& pr : profiles)
        if (!(pr.sup_norm() > r)) ++n;
    return n;
}

double r_cap_from(const SolutionSet& set) {
    if (set.profiles.empty()) throw verification_failure("NO_SOLUTIONS", "no solutions to derive R from");
    double m = 0.0;
    for (const auto& pr : set.profiles) m = std::max(m, pr.sup_norm());
    return 1.5 * m;
}

VerificationReport verify_lower_bound(double lambda, std::span<const double> thetas, const Weight& weight, double p,
                                  const ScanOptions& opts) {
    VerificationReport rep;
    rep.lemma = "lower_bound";
    rep.weight_id = weight.spec().id();
    rep.lambda = lambda;
    rep.p = p;
    const double r = r_lambda(lambda, weight.sup_norm(), p);
    rep.thresholds["r_lambda"] = r;
    int violations = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (double theta : thetas) {
        if (!(theta > 0 && theta <= 1)) throw spec_error("theta must lie in (0, 1]");
        ShootingField f;
        f.lambda = lambda;
        f.p = p;
        f.theta = theta;
        SolutionSet set = enumerate_solutions(weight, f, opts);
        int v = lower_bound_violations(set.profiles, r);
        double mn = std::numeric_limits<double>::infinity();
        for (const auto& pr : set.profiles) mn = std::min(mn, pr.sup_norm());
        violations += v;
        if (!set.profiles.empty()) worst = std::min(worst, mn - r);
        rep.rows.push_back({lambda,
                            {{"theta", theta},
                             {"solutions", static_cast<double>(set.size())},
                             {"min_norm", set.profiles.empty() ? 0.0 : mn},
                             {"violations", static_cast<double>(v)}}});
    }
    rep.margins["violations"] = violations;
    if (std::isfinite(worst)) rep.margins["min_norm_minus_r"] = worst;
    rep.status = violations == 0 ? ReportStatus::Pass : ReportStatus::Fail;
    return rep;
}

std::vector<SolutionSet> sweep_solutions(std::span<const double> lambda_grid, const Weight& weight, double p,
                                         const ScanOptions& opts) {
    std::vector<SolutionSet> out;
    out.reserve(lambda_grid.size());
    for (double l : lambda_grid) out.push_back(enumerate_solutions(l, weight, p, opts));
    return out;
}

std::vector<std::pair<double, double>> default_negativity_compacts(const SignPattern& pattern) {
    std::vector<std::pair<double, double>> k;
    for (int i = 0; i + 1 < pattern.n; ++i) {
        double a = pattern.tau[i], b = pattern.sigma[i + 1];
        double eta = 0.05 * (b - a);
        k.emplace_back(a + eta, b - eta);
    }
    return k;
}

namespace {

// Indices of the sweep sorted by increasing lambda.
std::vector<std::size_t> ascending(std::span<const SolutionSet> sweep) {
    std::vector<std::size_t> idx(sweep.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return sweep[a].lambda < sweep[b].lambda; });
    return idx;
}

// Largest lambda such that ok holds at it and at every smaller grid value.
template <class Pred>
std::optional<double> lowest_run(std::span<const SolutionSet> sweep, Pred ok) {
    std::optional<double> best;
    for (std::size_t i : ascending(sweep)) {
        if (!ok(sweep[i])) break;
        best = sweep[i].lambda;
    }
    return best;
}

int band_hits(const SolutionSet& set, const SignPattern& pattern, double rho, double margin) {
    int hits = 0;
    for (const auto& pr : set.profiles)
        for (double s : per_interval_sups(pr, pattern))
            if (std::abs(s - rho) <= margin * rho) ++hits;
    return hits;
}

}  // namespace

VerificationReport verify_decay(std::span<const SolutionSet> sweep, const std::vector<std::pair<double, double>>& compacts,
                                  double delta, const Weight& weight, double p) {
    VerificationReport rep;
    rep.lemma = "decay_on_negativity";
    rep.weight_id = weight.spec().id();
    rep.p = p;
    rep.thresholds["delta"] = delta;
    if (compacts.empty()) throw spec_error("decay check needs at least one compact");

    std::map<double, double> peak;
    for (const auto& set : sweep) {
        double m = 0.0;
        for (const auto& pr : set.profiles)
            for (auto [a, b] : compacts) m = std::max(m, pr.sup_on(a, b));
        peak[set.lambda] = m;
        rep.rows.push_back({set.lambda, {{"max_on_K", m}, {"solutions", static_cast<double>(set.size())}}});
    }
    auto thr = lowest_run(sweep, [&](const SolutionSet& s) { return peak[s.lambda] < delta; });
    if (!peak.empty()) {
        double top = peak.rbegin()->second, bottom = peak.begin()->second;
        rep.margins["decay_factor"] = bottom > 0 ? top / bottom : std::numeric_limits<double>::infinity();
    }
    if (thr) {
        rep.thresholds["lambda_delta"] = *thr;
        rep.status = ReportStatus::Pass;
    } else {
        rep.status = ReportStatus::Inconclusive;
        rep.note = "max over K never dropped below delta on the lambda grid";
    }
    return rep;
}

VerificationReport verify_dichotomy(double rho, std::span<const SolutionSet> sweep, const Weight& weight, double p,
                                  double margin) {
    VerificationReport rep;
    rep.lemma = "dichotomy";
    rep.weight_id = weight.spec().id();
    rep.p = p;
    rep.rho = rho;
    rep.thresholds["band_low"] = rho * (1 - margin);
    rep.thresholds["band_high"] = rho * (1 + margin);
    const SignPattern& pat = weight.pattern();
    double closest = std::numeric_limits<double>::infinity();
    for (const auto& set : sweep) {
        double near = std::numeric_limits<double>::infinity();
        for (const auto& pr : set.profiles)
            for (double s : per_interval_sups(pr, pat)) near = std::min(near, std::abs(s - rho));
        rep.rows.push_back({set.lambda,
                            {{"band_hits", static_cast<double>(band_hits(set, pat, rho, margin))},
                             {"closest_to_rho", std::isfinite(near) ? near : -1.0}}});
    }
    auto hat = lowest_run(sweep, [&](const SolutionSet& s) { return band_hits(s, pat, rho, margin) == 0; });
    if (hat) {
        rep.thresholds["lambda_hat"] = *hat;
        for (const auto& set : sweep)
            if (set.lambda <= *hat)
                for (const auto& pr : set.profiles)
                    for (double s : per_interval_sups(pr, pat)) closest = std::min(closest, std::abs(s - rho));
        if (std::isfinite(closest)) rep.margins["closest_to_rho"] = closest;
        rep.status = ReportStatus::Pass;
    } else {
        rep.status = ReportStatus::Inconclusive;
        rep.note = "dead band is hit at the most negative grid value";
    }
    return rep;
}

VerificationReport verify_forced_nonexistence(double lambda, const Weight& weight, double p, const IndexSet& set, double factor,
                                  const ScanOptions& opts, std::optional<double> r_cap) {
    VerificationReport rep;
    rep.lemma = "forced_nonexistence";
    rep.weight_id = weight.spec().id();
    rep.lambda = lambda;
    rep.p = p;
    const double R = r_cap ? *r_cap : r_cap_from(enumerate_solutions(lambda, weight, p, opts));
    BumpWeight bump(weight, set);
    const double ms = mu_star(lambda, R, weight, bump, p, opts.grid);
    const double mu = factor * ms;
    double w_sup = max_norm(bump.samples(opts.grid));
    const double s_bound =
        weight.length() * (std::abs(lambda) * R + weight.sup_norm() * std::pow(R, p) + mu * w_sup);
    rep.thresholds["R"] = R;
    rep.thresholds["mu_star"] = ms;
    rep.thresholds["mu"] = mu;
    rep.thresholds["s_bound"] = s_bound;

    ShootingField f;
    f.lambda = lambda;
    f.p = p;
    f.mu = mu;
    f.bump = &bump;
    ScanOptions o = opts;
    o.include_zero_slope = true;
    o.s_max = s_bound;
    o.s_min = 1e-12 * s_bound;
    SolutionSet found = enumerate_solutions(weight, f, o);

    double max_finite = -std::numeric_limits<double>::infinity();
    int finite = 0;
    for (const auto& smp : found.scan) {
        if (std::isfinite(smp.terminal)) {
            max_finite = std::max(max_finite, smp.terminal);
            ++finite;
        }
    }
    rep.margins["solutions"] = static_cast<double>(found.size());
    if (finite) rep.margins["max_finite_S"] = max_finite;
    rep.rows.push_back({lambda,
                        {{"scan_points", static_cast<double>(found.scan.size())},
                         {"finite_points", static_cast<double>(finite)},
                         {"solutions", static_cast<double>(found.size())}}});
    rep.status = found.size() == 0 ? ReportStatus::Pass : ReportStatus::Fail;
    return rep;
}

DegreeTable degree_table(const SolutionSet& set, const Weight& weight, double /*p*/, double rho, double margin) {
    const SignPattern& pat = weight.pattern();
    ClassifierConfig cfg;
    cfg.rho = rho;
    cfg.margin = margin;
    DegreeTable t;
    t.lambda = set.lambda;
    t.orientation = calibrate_orientation(set, pat, cfg);
    auto boxes = all_index_sets(pat.n);
    for (const auto& I : boxes) {
        t.lambda_boxes[I] = box_degree(set, pat, I, cfg, t.orientation);
        t.occupancy[I] = I.empty() ? 1 : 0;
    }
    for (const auto& pr : set.profiles) ++t.occupancy[classify(pr, pat, cfg)];
    bool ok = true;
    for (const auto& I : boxes) {
        int sum = 0;
        for (const auto& J : boxes)
            if (J.is_subset_of(I)) sum += t.lambda_boxes[J];
        t.omega_boxes[I] = sum;
        int expect_box = (I.cardinality() % 2 == 0) ? 1 : -1;
        int expect_omega = I.empty() ? 1 : 0;
        if (t.lambda_boxes[I] != expect_box || sum != expect_omega) ok = false;
    }
    t.pass = ok;
    return t;
}

DegreeTable degree_table(double lambda, const Weight& weight, double p, double rho, const ScanOptions& opts) {
    return degree_table(enumerate_solutions(lambda, weight, p, opts), weight, p, rho);
}

std::optional<double> discover_lambda_star(std::span<const SolutionSet> sweep, const Weight& weight, double p, double rho,
                                           double margin) {
    return lowest_run(sweep, [&](const SolutionSet& s) {
        return rho < r_lambda(s.lambda, weight.sup_norm(), p) && band_hits(s, weight.pattern(), rho, margin) == 0;
    });
}

std::optional<double> empirical_lambda_c(std::span<const NewtonSolutionSet> sweep, int n) {
    std::vector<const NewtonSolutionSet*> sorted;
    for (const auto& s : sweep) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return a->lambda < b->lambda; });
    auto boxes = nonempty_index_sets(n);
    std::optional<double> best;
    for (const auto* s : sorted) {
        bool all = std::all_of(boxes.begin(), boxes.end(), [&](const IndexSet& I) { return s->occupies(I); });
        if (!all) break;
        best = s->lambda;
    }
    return best;
}

}  // namespace multibump
