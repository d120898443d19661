#include "multibump/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "multibump/classifier.hpp"
#include "multibump/errors.hpp"
#include "multibump/parallel.hpp"

namespace multibump {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// x^p for x >= 0 with a multiply chain when p is a small integer.
struct PowerLaw {
    double p;
    int ip = -1;
    explicit PowerLaw(double p_) : p(p_) {
        if (p_ == std::floor(p_) && p_ >= 2 && p_ <= 8) ip = static_cast<int>(p_);
    }
    double operator()(double x) const {
        if (ip > 0) {
            double r = x;
            for (int k = 1; k < ip; ++k) r *= x;
            return r;
        }
        return std::pow(x, p);
    }
};

struct Rhs {
    const Weight& a;
    const ShootingField& f;
    PowerLaw pw;

    ode::State operator()(double x, const ode::State& y) const {
        double up = y[0] > 0 ? y[0] : 0.0;
        double g = 0.0;
        if (up > 0) g = f.theta * (f.lambda * up + a(x) * pw(up));
        if (f.mu != 0.0 && f.bump) g += f.mu * (*f.bump)(x);
        return {y[1], -g};
    }
};

double sinh_over_k(double k, double L) {
    if (k * L < 1e-8) return L;
    return std::sinh(k * L) / k;
}

double sign_of(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

}  // namespace

ShootingOutcome integrate_ivp(const Weight& weight, const ShootingField& field, double s, const ShootingCaps& caps,
                              const IvpOptions& opts) {
    const SignPattern& pat = weight.pattern();
    const double L = weight.length();
    ShootingOutcome out;
    out.s = s;
    out.per_interval_sup.assign(pat.n, 0.0);
    out.event_x = L;

    const Grid* g = opts.sample_grid;
    std::vector<double> stops;
    if (g) {
        out.trajectory.assign(g->size(), 0.0);
        stops.reserve(g->N + 1);
        for (int j = 1; j <= g->N + 1; ++j) stops.push_back(g->x(j));
    }
    std::size_t next_node = 1;

    Rhs rhs{weight, field, PowerLaw(field.p)};
    bool crossed = false;
    bool early_linear = false;
    double cross_x = 0.0;
    ode::State cross_y{};

    auto track = [&](double x, const ode::State& y) {
        if (y[0] > 0) {
            int r = pat.region(x);
            if (r % 2 == 1) {
                auto& m = out.per_interval_sup[(r - 1) / 2];
                m = std::max(m, y[0]);
            }
        }
    };

    auto observe = [&](double, const ode::State&, double x, const ode::State& y) {
        if (g) {
            while (next_node <= stops.size() && std::abs(stops[next_node - 1] - x) <= 1e-14 * L) {
                out.trajectory[next_node] = y[0];
                ++next_node;
            }
        }
        track(x, y);
        if (!(std::abs(y[0]) <= caps.u_cap)) {
            out.blew_up = true;
            out.fate = Fate::BlownUp;
            out.terminal = y[0] > 0 ? kInf : -kInf;
            out.event_x = x;
            return false;
        }
        if (!crossed && y[0] < 0) {
            crossed = true;
            cross_x = x;
            cross_y = y;
            // With no forcing, u'' = 0 once u < 0, so a downward crossing is final.
            if (field.mu == 0.0 && y[1] < 0) {
                early_linear = true;
                return false;
            }
        }
        return true;
    };

    ode::Result res;
    ode::State y0{0.0, s};
    if (s == 0.0 && (field.mu == 0.0 || !field.bump)) {
        res.status = ode::Status::Completed;
        res.x = L;
        res.y = y0;
    } else if (!opts.replay_mesh.empty()) {
        res = ode::integrate_on_mesh(rhs, opts.replay_mesh, y0, observe);
    } else {
        res = ode::integrate(rhs, 0.0, y0, L, caps.tol, observe, std::span<const double>(stops), opts.record_mesh);
        if (res.status == ode::Status::StepUnderflow || res.status == ode::Status::TooManySteps)
            throw numerical_fault("INTEGRATION_FAULT",
                                  "integrator failed at x = " + std::to_string(res.x) + " for s = " + std::to_string(s));
    }

    if (out.blew_up) {
        out.event_region = pat.region(std::min(out.event_x, L));
        return out;
    }
    if (early_linear) {
        out.fate = Fate::Crossed;
        out.event_x = cross_x;
        out.terminal = cross_y[0] + cross_y[1] * (L - cross_x);
        if (g) {
            for (; next_node < static_cast<std::size_t>(g->size()); ++next_node)
                out.trajectory[next_node] = cross_y[0] + cross_y[1] * (g->x(static_cast<int>(next_node)) - cross_x);
        }
    } else {
        out.terminal = res.y[0];
        out.fate = crossed ? Fate::Crossed : Fate::Survived;
        out.event_x = crossed ? cross_x : L;
        if (!std::isfinite(out.terminal)) {
            out.blew_up = true;
            out.fate = Fate::BlownUp;
            out.terminal = kInf;
        }
    }
    out.event_region = pat.region(std::min(out.event_x, L));
    return out;
}

double default_s_min(const Weight& weight, const ShootingField& field) {
    double r = r_lambda(field.lambda, weight.sup_norm(), field.p);
    double k = std::sqrt(std::max(0.0, -field.theta * field.lambda));
    return 1e-6 * r / sinh_over_k(k, weight.length());
}

double default_s_max(const Weight& weight, const ShootingField& field) {
    double r = r_lambda(field.lambda, weight.sup_norm(), field.p);
    double k = std::sqrt(std::max(0.0, -field.theta * field.lambda));
    return 10.0 * r * std::cosh(k * weight.length());
}

namespace {

struct Eval {
    double s = 0.0;
    double terminal = 0.0;
    Fate fate = Fate::Survived;
    int region = 0;
    double event_x = 0.0;
    std::vector<double> sups;

    auto key() const { return std::make_tuple(static_cast<int>(fate), sign_of(terminal), region); }
};

class Scanner {
public:
    Scanner(const Weight& w, const ShootingField& f, const ScanOptions& o) : w_(w), f_(f), o_(o) {}

    Eval eval(double s) const {
        ShootingOutcome r = integrate_ivp(w_, f_, s, o_.caps);
        return Eval{s, r.terminal, r.fate, r.event_region, r.event_x, std::move(r.per_interval_sup)};
    }

    double terminal_on(std::span<const double> mesh, double s) const {
        IvpOptions io;
        io.replay_mesh = mesh;
        return integrate_ivp(w_, f_, s, o_.caps, io).terminal;
    }

    void add_segment(double lo, double hi, bool include_lo) {
        std::vector<double> pts;
        if (include_lo) pts.push_back(lo);
        if (lo > 0) {
            int n = std::max(1, static_cast<int>(std::ceil(o_.points_per_decade * std::log10(hi / lo))));
            for (int k = 1; k <= n; ++k) pts.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / n));
        }
        for (int k = 1; k <= o_.uniform_points; ++k) pts.push_back(lo + (hi - lo) * k / o_.uniform_points);
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        std::vector<double> fresh;
        for (double s : pts)
            if (!evals_.count(s)) fresh.push_back(s);
        std::vector<Eval> got(fresh.size());
        parallel_for(fresh.size(), o_.threads, [&](std::size_t i) { got[i] = eval(fresh[i]); });
        for (auto& e : got) evals_.emplace(e.s, std::move(e));
    }

    // Bisect every adjacent pair whose fates differ until the pair is
    // narrower than bracket_rel (relative).
    void refine_transitions() {
        std::vector<std::pair<Eval, Eval>> pairs;
        for (auto it = evals_.begin(); std::next(it) != evals_.end(); ++it) {
            const Eval& a = it->second;
            const Eval& b = std::next(it)->second;
            if (needs_split(a, b)) pairs.emplace_back(a, b);
        }
        std::vector<std::vector<Eval>> found(pairs.size());
        parallel_for(pairs.size(), o_.threads, [&](std::size_t i) { bisect(pairs[i].first, pairs[i].second, found[i]); });
        for (auto& v : found)
            for (auto& e : v) evals_.emplace(e.s, std::move(e));
    }

    std::vector<std::pair<Eval, Eval>> sign_brackets() const {
        std::vector<std::pair<Eval, Eval>> out;
        for (auto it = evals_.begin(); std::next(it) != evals_.end(); ++it) {
            const Eval& a = it->second;
            const Eval& b = std::next(it)->second;
            if (a.s == 0.0 && a.terminal == 0.0) continue;
            if (sign_of(a.terminal) * sign_of(b.terminal) < 0) out.emplace_back(a, b);
        }
        return out;
    }

    const std::map<double, Eval>& evals() const { return evals_; }
    const Weight& weight() const { return w_; }
    const ShootingField& field() const { return f_; }

private:
    static bool narrow(double a, double b, double rel) { return b - a <= rel * std::max(std::abs(b), 1e-300); }

    // Continuous summary of a trajectory: where it ended and how large it got
    // on each hump. Jumps between neighbours hint at unresolved structure.
    double signature_gap(const Eval& a, const Eval& b) const {
        double d = std::abs(a.event_x - b.event_x) / w_.length();
        for (std::size_t i = 0; i < a.sups.size(); ++i)
            d = std::max(d, std::abs(std::asinh(a.sups[i]) - std::asinh(b.sups[i])));
        return d;
    }

    bool needs_split(const Eval& a, const Eval& b) const {
        if (a.key() != b.key()) return !narrow(a.s, b.s, o_.bracket_rel);
        return signature_gap(a, b) > o_.signature_tol && !narrow(a.s, b.s, o_.signature_rel);
    }

    static double midpoint(double a, double b) {
        if (a > 0 && b > 4 * a) return std::sqrt(a) * std::sqrt(b);
        return 0.5 * (a + b);
    }

    void bisect(const Eval& a, const Eval& b, std::vector<Eval>& out) const {
        if (!needs_split(a, b)) return;
        double m = midpoint(a.s, b.s);
        if (m <= a.s || m >= b.s) return;
        Eval e = eval(m);
        bisect(a, e, out);
        bisect(e, b, out);
        out.push_back(std::move(e));
    }

    const Weight& w_;
    const ShootingField& f_;
    const ScanOptions& o_;
    std::map<double, Eval> evals_;
};

struct Zero {
    double s = 0.0;
    double terminal = 0.0;
    double derivative = 0.0;
    std::vector<double> values;
};

// Refines a sign-change bracket to a zero of S. Returns false for a
// blow-up edge (a sign change through the +-infinity sentinel only).
bool refine_zero(const Scanner& sc, Eval a, Eval b, const ScanOptions& o, Zero& z) {
    // Shrink until both ends are finite.
    for (int it = 0; it < 200 && (!std::isfinite(a.terminal) || !std::isfinite(b.terminal)); ++it) {
        double m = 0.5 * (a.s + b.s);
        if (m <= a.s || m >= b.s) return false;
        Eval e = sc.eval(m);
        if (e.terminal == 0.0) {
            a = b = e;
            break;
        }
        if (sign_of(e.terminal) == sign_of(a.terminal))
            a = e;
        else
            b = e;
    }
    if (!std::isfinite(a.terminal) || !std::isfinite(b.terminal)) return false;

    // Freeze a fine step sequence that also lands on every grid node, so the
    // refined zero and the sampled profile come from the same discrete map.
    ShootingCaps fine = o.caps;
    fine.tol.rtol = 1e-12;
    fine.tol.atol = 1e-14;
    std::vector<double> mesh;
    {
        IvpOptions io;
        io.sample_grid = &o.grid;
        io.record_mesh = &mesh;
        integrate_ivp(sc.weight(), sc.field(), 0.5 * (a.s + b.s), fine, io);
    }
    if (mesh.back() < o.grid.L) {
        // The midpoint trajectory stopped early; extend with the grid nodes.
        for (int j = 1; j <= o.grid.N + 1; ++j)
            if (o.grid.x(j) > mesh.back()) mesh.push_back(o.grid.x(j));
    }
    auto S = [&](double s) { return sc.terminal_on(mesh, s); };

    double xa = a.s, xb = b.s;
    double fa = S(xa), fb = S(xb);
    if (!(std::isfinite(fa) && std::isfinite(fb) && fa * fb < 0)) {
        // The frozen map's zero sits just outside the adaptive bracket;
        // widen geometrically until it is enclosed again.
        const double w0 = xb - xa;
        bool found = false;
        for (int k = 0; k < 40 && !found; ++k) {
            double lo = xa - w0 * std::ldexp(1.0, k), hi = xb + w0 * std::ldexp(1.0, k);
            double flo = S(lo), fhi = S(hi);
            if (std::isfinite(flo) && std::isfinite(fa) && flo * fa < 0) {
                xb = xa, fb = fa, xa = lo, fa = flo;
                found = true;
            } else if (std::isfinite(fb) && std::isfinite(fhi) && fb * fhi < 0) {
                xa = xb, fa = fb, xb = hi, fb = fhi;
                found = true;
            } else if (std::isfinite(flo) && std::isfinite(fhi) && flo * fhi < 0) {
                xa = lo, fa = flo, xb = hi, fb = fhi;
                found = true;
            }
        }
        if (!found) return false;
    }
    double xs = 0.5 * (xa + xb), fs = 0.0;
    int side = 0;
    for (int it = 0; it < 400; ++it) {
        xs = (xa * fb - xb * fa) / (fb - fa);
        if (!(xs > xa && xs < xb)) xs = 0.5 * (xa + xb);
        fs = S(xs);
        if (!std::isfinite(fs)) {
            xs = 0.5 * (xa + xb);
            fs = S(xs);
            if (!std::isfinite(fs)) break;
        }
        if (std::abs(fs) <= o.zero_tol) break;
        if (fs * fb > 0) {
            xb = xs;
            fb = fs;
            if (side == -1) fa *= 0.5;
            side = -1;
        } else {
            xa = xs;
            fa = fs;
            if (side == 1) fb *= 0.5;
            side = 1;
        }
        if (xb - xa <= 4 * std::numeric_limits<double>::epsilon() * std::abs(xb)) {
            // At the resolution of s itself: keep the end with the smaller |S|.
            if (std::abs(fa) < std::abs(fs)) xs = xa, fs = fa;
            if (std::abs(fb) < std::abs(fs)) xs = xb, fs = fb;
            break;
        }
    }
    z.s = xs;
    z.terminal = fs;
    double d = 1e-6 * xs;
    z.derivative = (S(xs + d) - S(xs - d)) / (2 * d);

    IvpOptions io;
    io.replay_mesh = mesh;
    io.sample_grid = &o.grid;
    z.values = integrate_ivp(sc.weight(), sc.field(), xs, fine, io).trajectory;
    z.values.front() = 0.0;
    z.values.back() = 0.0;
    return true;
}

}  // namespace

SolutionSet enumerate_solutions(const Weight& weight, const ShootingField& field, const ScanOptions& opts) {
    if (!(field.lambda < 0)) throw spec_error("enumerate_solutions requires lambda < 0");
    if (!(field.p > 1)) throw spec_error("enumerate_solutions requires p > 1");
    if (opts.grid.L != weight.length()) throw spec_error("scan grid length differs from the weight's domain");

    Scanner sc(weight, field, opts);
    double s_min = opts.s_min > 0 ? opts.s_min : default_s_min(weight, field);
    const bool auto_max = !(opts.s_max > 0);
    double s_max = auto_max ? default_s_max(weight, field) : opts.s_max;
    if (!(s_max > s_min)) throw spec_error("scan range is empty");

    SolutionSet set;
    set.lambda = field.lambda;
    if (opts.include_zero_slope) sc.add_segment(0.0, s_min, true);
    sc.add_segment(s_min, s_max, true);
    sc.refine_transitions();

    if (auto_max) {
        std::size_t count = sc.sign_brackets().size();
        bool settled = false;
        for (int d = 0; d < opts.max_doublings; ++d) {
            sc.add_segment(s_max, 2 * s_max, false);
            sc.refine_transitions();
            s_max *= 2;
            std::size_t now = sc.sign_brackets().size();
            if (now == count) {
                settled = true;
                break;
            }
            count = now;
        }
        if (!settled)
            set.warnings.push_back("s_max doubling did not settle after " + std::to_string(opts.max_doublings) +
                                   " rounds");
    }
    set.s_max = s_max;

    auto brackets = sc.sign_brackets();
    std::vector<Zero> zeros(brackets.size());
    std::vector<char> ok(brackets.size(), 0);
    parallel_for(brackets.size(), opts.threads,
                 [&](std::size_t i) { ok[i] = refine_zero(sc, brackets[i].first, brackets[i].second, opts, zeros[i]); });

    std::vector<Zero> found;
    for (std::size_t i = 0; i < zeros.size(); ++i)
        if (ok[i]) found.push_back(zeros[i]);
    for (std::size_t i = 1; i < found.size(); ++i) {
        if (found[i].s - found[i - 1].s <= opts.bracket_rel * found[i].s)
            throw numerical_fault("UNRESOLVED", "two shooting zeros near s = " + std::to_string(found[i].s) +
                                                    " cannot be separated at the scan resolution");
    }

    std::vector<GridProfile> sampled(found.size());
    for (std::size_t i = 0; i < found.size(); ++i)
        sampled[i] = GridProfile{opts.grid, std::move(found[i].values), field.lambda, std::abs(found[i].terminal),
                                 ProfileSource::Shooting};

    for (std::size_t i = 0; i < found.size(); ++i) {
        bool dup = false;
        for (const auto& kept : set.profiles)
            if (sup_distance(kept, sampled[i]) < opts.dedup_tol) dup = true;
        if (dup) {
            set.warnings.push_back("merged duplicate zero at s = " + std::to_string(found[i].s));
            continue;
        }
        const double dS = found[i].derivative;
        set.profiles.push_back(std::move(sampled[i]));
        set.slopes.push_back(found[i].s);
        set.derivatives.push_back(dS);
        set.indices.push_back(dS > 0 ? 1 : -1);
        bool degen = !(std::abs(dS) >= opts.degenerate_slope);
        set.degenerate.push_back(degen);
        if (degen)
            set.warnings.push_back("degenerate zero at s = " + std::to_string(found[i].s) +
                                   " excluded from degree sums");
    }

    const auto& ev = sc.evals();
    for (const auto& [s, e] : ev) {
        if (s > 0) {
            set.trivial_index = e.terminal > 0 ? 1 : -1;
            break;
        }
    }
    set.scan.reserve(ev.size());
    for (const auto& [s, e] : ev) set.scan.push_back(ScanSample{s, e.terminal, e.fate == Fate::BlownUp, e.sups});
    return set;
}

SolutionSet enumerate_solutions(double lambda, const Weight& weight, double p, const ScanOptions& opts) {
    ShootingField f;
    f.lambda = lambda;
    f.p = p;
    return enumerate_solutions(weight, f, opts);
}

int box_degree(const SolutionSet& set, const SignPattern& pattern, const IndexSet& index_set,
               const ClassifierConfig& cfg, int orientation) {
    index_set.check_range(pattern.n);
    int raw = index_set.empty() ? set.trivial_index : 0;
    for (std::size_t k = 0; k < set.profiles.size(); ++k) {
        for (double sup : per_interval_sups(set.profiles[k], pattern)) {
            if (std::abs(sup - cfg.rho) <= cfg.margin * cfg.rho)
                throw verification_failure("MARGIN_VIOLATION",
                                           "per-interval sup " + std::to_string(sup) + " lies on the box boundary");
        }
        if (set.degenerate[k]) continue;
        if (classify(set.profiles[k], pattern, cfg) == index_set) raw += set.indices[k];
    }
    return orientation * raw;
}

int calibrate_orientation(const SolutionSet& set, const SignPattern& pattern, const ClassifierConfig& cfg) {
    int raw = box_degree(set, pattern, IndexSet{}, cfg, 1);
    if (raw == 0)
        throw verification_failure("CALIBRATION_FAILED", "empty-set box has zero signed count; orientation undefined");
    return raw > 0 ? 1 : -1;
}

std::string to_string(LiouvilleVerdict v) { return v == LiouvilleVerdict::Exits ? "EXITS" : "NO_EXIT"; }

std::vector<LiouvilleResult> liouville_check(const LiouvilleProblem& prob, double p, std::span<const double> slopes,
                                             double x_max) {
    if (!(prob.alpha > 0) || !(prob.gamma >= 0) || !(prob.kappa >= 0))
        throw spec_error("LiouvilleProblem requires alpha > 0, gamma >= 0, kappa >= 0");
    if (!(p > 1)) throw spec_error("liouville_check requires p > 1");
    if (!(x_max >= 10 * (1 + prob.kappa))) throw spec_error("liouville_check requires x_max >= 10 (1 + kappa)");

    PowerLaw pw(p);
    auto rhs = [&](double x, const ode::State& y) -> ode::State {
        double vp = y[0] > 0 ? y[0] : 0.0;
        return {y[1], -(prob.alpha * std::pow(x + prob.kappa, prob.gamma) * pw(vp) + prob.beta(x))};
    };
    ode::Tolerances tol;
    tol.rtol = 1e-12;
    tol.atol = 1e-14;
    const double top = 1.0 + 1e-12;
    const std::array<double, 1> stop_at_one{1.0};

    std::vector<LiouvilleResult> out;
    for (double s : slopes) {
        if (s > 0) throw spec_error("liouville_check slopes must be <= 0");
        LiouvilleResult r;
        r.slope = s;
        auto observe = [&](double x0, const ode::State& y0, double x, const ode::State& y) {
            if (x == 1.0 && y[0] >= 0 && y[0] <= top) {
                r.reached_one = true;
                r.v1 = y[0];
                r.dv1 = y[1];
            }
            if (y[0] >= 0 && y[0] <= top) return true;
            // Locate the exit inside the last step by bisection on the step length.
            const double bound = y[0] < 0 ? 0.0 : top;
            const double dir = y[0] < 0 ? -1.0 : 1.0;
            ode::State k1 = rhs(x0, y0), yn, k7;
            double lo = 0.0, hi = x - x0;
            while (hi - lo > 1e-10) {
                double mid = 0.5 * (lo + hi);
                ode::dp5_step(rhs, x0, y0, mid, k1, yn, k7, nullptr);
                if (dir * (yn[0] - bound) > 0)
                    hi = mid;
                else
                    lo = mid;
            }
            r.verdict = LiouvilleVerdict::Exits;
            r.exit_x = x0 + hi;
            return false;
        };
        ode::Result res = ode::integrate(rhs, 0.0, ode::State{1.0, s}, x_max, tol, observe,
                                         std::span<const double>(stop_at_one));
        if (res.status == ode::Status::StepUnderflow || res.status == ode::Status::TooManySteps)
            throw numerical_fault("INTEGRATION_FAULT", "Liouville trajectory failed at x = " + std::to_string(res.x));
        if (r.verdict == LiouvilleVerdict::NoExit) r.exit_x = x_max;
        if (r.reached_one && r.dv1 < 0) {
            r.bound_applies = true;
            r.bound = 1.0 + r.v1 / (-r.dv1);
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace multibump
