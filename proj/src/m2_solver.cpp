#include "womops/m2_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include "womops/errors.hpp"

namespace womops {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kDims = 4;  // t1, t2, t3, F
using Point = std::array<double, kDims>;

// Profit-rate evaluator with the equilibrium demand substituted in. Avoids the
// validation overhead of the public domain functions on the hot path.
class Evaluator {
public:
    explicit Evaluator(const M2Problem& problem) : pb_(problem) {}

    double theta(double t1, double t2, double t3) const {
        const double T = t1 + t2 + t3;
        const auto elementary = [&](SignalKind k) {
            return k == SignalKind::MDT ? t3 / pb_.params.tau : (t2 + t3) / T;
        };
        if (pb_.signal.kind != SignalKind::Weighted) return elementary(pb_.signal.kind);
        double th = 0.0;
        for (const auto& [k, w] : pb_.signal.weights) th += w * elementary(k);
        return th;
    }

    double response_factor(double th) const {
        const double c2 = pb_.response.c2;
        if (c2 == 1.0) return th;
        return std::pow(th, c2);
    }

    double c1(double fee) const {
        const FeeModel& fm = pb_.fee_model;
        const double n = fm.family == FeeFamily::Linear ? fm.a - fm.b * fee
                                                         : fm.a * std::log(fm.b - fee);
        return std::max(0.0, n) * fm.delta;
    }

    // Profit given the response factor theta^c2 and potential market c1.
    double profit(double t1, double t2, double t3, double fee, double factor, double c1v) const {
        const MarketParams& p = pb_.params;
        const double T = t1 + t2 + t3;
        const double lp = c1v * factor;
        return p.r * lp + p.r * p.lambda_r * (t1 + t3) / T +
               fee * lp / (pb_.fee_model.delta * p.M) - p.K / T - p.h * T * lp / 2.0 -
               p.h * p.lambda_r * t1 * t1 / (2.0 * T);
    }

    double operator()(const Point& x) const {
        ++evals;
        const double T = x[0] + x[1] + x[2];
        if (!(T > 1e-12)) return kNegInf;
        return profit(x[0], x[1], x[2], x[3], response_factor(theta(x[0], x[1], x[2])), c1(x[3]));
    }

    mutable long evals = 0;

private:
    const M2Problem& pb_;
};

struct Box {
    Point lo{}, hi{};

    Point clamp(Point x) const {
        for (int i = 0; i < kDims; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
        return x;
    }
};

struct Scored {
    Point x;
    double f;
};

// Bounded Nelder-Mead (maximisation) over the free coordinates; trial points
// are projected onto the box.
Scored nelder_mead(const Evaluator& eval, const Box& box, Scored start, const Point& scale,
                   double tol, int max_iter) {
    std::vector<int> free;
    for (int i = 0; i < kDims; ++i)
        if (box.hi[i] - box.lo[i] > 0) free.push_back(i);
    const std::size_t n = free.size();
    if (n == 0) return start;

    std::vector<Scored> simplex;
    simplex.push_back(start);
    for (int d : free) {
        Point x = start.x;
        const double room_up = box.hi[d] - x[d];
        x[d] += room_up >= scale[d] ? scale[d] : -scale[d];
        x = box.clamp(x);
        simplex.push_back({x, eval(x)});
    }

    const auto by_value = [](const Scored& a, const Scored& b) { return a.f > b.f; };
    const auto combine = [&](const Point& c, const Point& x, double coef) {
        Point y = c;
        for (int d : free) y[d] = c[d] + coef * (x[d] - c[d]);
        return box.clamp(y);
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        std::sort(simplex.begin(), simplex.end(), by_value);
        const double best = simplex.front().f;
        const double worst = simplex.back().f;
        double diameter = 0.0;
        for (std::size_t k = 1; k <= n; ++k)
            for (int d : free)
                diameter = std::max(diameter, std::abs(simplex[k].x[d] - simplex[0].x[d]));
        if (std::isfinite(worst) && best - worst <= tol * std::max(1.0, std::abs(best)) &&
            diameter <= 1e-9)
            break;
        if (diameter <= 1e-13) break;

        Point centroid = simplex[0].x;
        for (int d : free) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += simplex[k].x[d];
            centroid[d] = s / static_cast<double>(n);
        }
        Scored& w = simplex.back();
        const Point xr = combine(centroid, w.x, -1.0);
        const double fr = eval(xr);
        if (fr > simplex[0].f) {
            const Point xe = combine(centroid, w.x, -2.0);
            const double fe = eval(xe);
            w = fe > fr ? Scored{xe, fe} : Scored{xr, fr};
            continue;
        }
        if (fr > simplex[n - 1].f) {
            w = {xr, fr};
            continue;
        }
        const bool outside = fr > w.f;
        const Point xc = combine(centroid, outside ? xr : w.x, outside ? 0.5 : 0.5);
        const double fc = eval(xc);
        if (fc > std::max(fr, w.f)) {
            w = {xc, fc};
            continue;
        }
        for (std::size_t k = 1; k <= n; ++k) {
            simplex[k].x = combine(simplex[0].x, simplex[k].x, 0.5);
            simplex[k].f = eval(simplex[k].x);
        }
    }
    return *std::max_element(simplex.begin(), simplex.end(),
                             [](const Scored& a, const Scored& b) { return a.f < b.f; });
}

// Coordinate-wise pattern search; handles active bounds cleanly.
Scored compass(const Evaluator& eval, const Box& box, Scored cur, Point step) {
    for (int round = 0; round < 20000; ++round) {
        bool improved = false;
        for (int d = 0; d < kDims; ++d) {
            if (box.hi[d] - box.lo[d] <= 0) continue;
            for (double sign : {1.0, -1.0}) {
                Point x = cur.x;
                x[d] += sign * step[d];
                x = box.clamp(x);
                if (x[d] == cur.x[d]) continue;
                const double f = eval(x);
                if (f > cur.f) {
                    cur = {x, f};
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) {
            double largest = 0.0;
            for (int d = 0; d < kDims; ++d) {
                step[d] *= 0.5;
                largest = std::max(largest, step[d]);
            }
            if (largest < 1e-11) break;
        }
    }
    return cur;
}

// Pull coordinates sitting within a hair of a bound onto it, when that does
// not cost objective.
Scored snap_to_bounds(const Evaluator& eval, const Box& box, Scored cur) {
    for (int d = 0; d < kDims; ++d) {
        for (double target : {box.lo[d], box.hi[d]}) {
            if (cur.x[d] == target || std::abs(cur.x[d] - target) > 1e-6) continue;
            Point x = cur.x;
            x[d] = target;
            const double f = eval(x);
            if (f >= cur.f - 1e-9) cur = {x, f};
        }
    }
    return cur;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(std::max(n, 1)));
    if (n <= 1 || hi <= lo) {
        std::fill(v.begin(), v.end(), lo);
        v.resize(1);
        return v;
    }
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    v.back() = hi;
    return v;
}

bool preferred(const Scored& a, const Scored& b) {
    if (std::abs(a.f - b.f) > 1e-6) return a.f > b.f;
    if (a.x[3] != b.x[3]) return a.x[3] < b.x[3];
    return a.x[0] + a.x[1] + a.x[2] < b.x[0] + b.x[1] + b.x[2];
}

// --- polynomial roots -------------------------------------------------------

using cplx = std::complex<double>;

std::array<cplx, 3> cubic_roots(cplx a, cplx b, cplx c, cplx d) {
    const cplx d0 = b * b - 3.0 * a * c;
    const cplx d1 = 2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d;
    const cplx disc = std::sqrt(d1 * d1 - 4.0 * d0 * d0 * d0);
    cplx C = (d1 + disc) / 2.0;
    if (std::abs(d1 - disc) > std::abs(d1 + disc)) C = (d1 - disc) / 2.0;
    std::array<cplx, 3> roots;
    if (std::abs(C) == 0.0) {
        roots.fill(-b / (3.0 * a));
        return roots;
    }
    C = std::pow(C, 1.0 / 3.0);
    const cplx xi(-0.5, std::sqrt(3.0) / 2.0);
    cplx ck = C;
    for (auto& r : roots) {
        r = -(b + ck + d0 / ck) / (3.0 * a);
        ck *= xi;
    }
    return roots;
}

// Roots of x^4 + A x^3 + B x^2 + C x + D.
std::array<cplx, 4> quartic_roots(double A, double B, double C, double D) {
    const double p = B - 3.0 * A * A / 8.0;
    const double q = C - A * B / 2.0 + A * A * A / 8.0;
    const double r = D - A * C / 4.0 + A * A * B / 16.0 - 3.0 * A * A * A * A / 256.0;
    std::array<cplx, 4> y;
    if (std::abs(q) < 1e-14) {
        const cplx s = std::sqrt(cplx(p * p - 4.0 * r));
        const cplx z1 = (-p + s) / 2.0;
        const cplx z2 = (-p - s) / 2.0;
        y = {std::sqrt(z1), -std::sqrt(z1), std::sqrt(z2), -std::sqrt(z2)};
    } else {
        const auto ms = cubic_roots(8.0, 8.0 * p, 2.0 * p * p - 8.0 * r, -q * q);
        cplx m = ms[0];
        for (const cplx& cand : ms)
            if (std::abs(cand) > std::abs(m)) m = cand;
        const cplx s = std::sqrt(2.0 * m);
        const cplx u = std::sqrt(-2.0 * p - 2.0 * m - 2.0 * q / s);
        const cplx v = std::sqrt(-2.0 * p - 2.0 * m + 2.0 * q / s);
        y = {(s + u) / 2.0, (s - u) / 2.0, (-s + v) / 2.0, (-s - v) / 2.0};
    }
    for (auto& yi : y) yi -= A / 4.0;
    return y;
}

}  // namespace

// --- M2Problem --------------------------------------------------------------

void M2Problem::validate() const {
    params.validate();
    fee_model.validate(params.f_min, params.f_max);
    signal.validate();
    if (!(response.c2 >= 0)) throw InvalidParams("response.c2 must be >= 0");
}

bool M2Problem::has_closed_forms() const {
    return signal.kind == SignalKind::MDT && fee_model.family == FeeFamily::Linear &&
           response.c2 == 1.0;
}

double M2Problem::equilibrium_demand(const ShipmentPolicy& policy, double fee) const {
    return respond(response, fee_model, fee, womops::signal(signal, policy, params.tau));
}

double M2Problem::objective(const ShipmentPolicy& policy, double fee) const {
    return profit_m2(params, fee_model, policy, fee, equilibrium_demand(policy, fee));
}

double M2Problem::time_cap() const {
    const MarketParams& p = params;
    double cap = 3.0 * p.tau;
    if (p.lambda_r > 0) cap = std::max(cap, 3.0 * std::sqrt(2.0 * p.K / (p.h * p.lambda_r)));
    return std::max(cap, 2.0 * p.r / p.h + 2.0 * p.f_max / (p.h * fee_model.delta * p.M));
}

std::string_view to_string(M2Branch branch) {
    switch (branch) {
        case M2Branch::NumericInterior: return "NumericInterior";
        case M2Branch::NumericBoundary: return "NumericBoundary";
        case M2Branch::ClosedFormInteriorFee: return "ClosedFormInteriorFee";
        case M2Branch::ClosedFormBoundaryFee: return "ClosedFormBoundaryFee";
    }
    return "?";
}

void SearchSpec::validate() const {
    if (time_points < 2) throw InvalidGrid("search.time_points must be >= 2");
    if (fee_points < 1) throw InvalidGrid("search.fee_points must be >= 1");
    if (top_n < 1) throw InvalidGrid("search.top_n must be >= 1");
    if (!(tolerance > 0)) throw InvalidGrid("search.tolerance must be > 0");
    if (max_iterations < 1) throw InvalidGrid("search.max_iterations must be >= 1");
}

// --- solve_m2 ---------------------------------------------------------------

M2Solution solve_m2(const M2Problem& problem, const SearchSpec& search) {
    problem.validate();
    search.validate();
    const MarketParams& p = problem.params;
    const Evaluator eval(problem);

    const double cap = problem.time_cap();
    Box box;
    box.lo = {0.0, 0.0, 0.0, p.f_min};
    box.hi = {cap, cap, p.tau, p.f_max};

    const auto g12 = linspace(0.0, cap, search.time_points);
    const auto g3 = linspace(0.0, p.tau, search.time_points);
    const auto gf = linspace(p.f_min, p.f_max, search.fee_points);
    std::vector<double> c1s(gf.size());
    for (std::size_t i = 0; i < gf.size(); ++i) c1s[i] = eval.c1(gf[i]);

    const std::size_t n12 = g12.size(), n3 = g3.size(), nf = gf.size();
    std::vector<double> values(n12 * n12 * n3 * nf, kNegInf);
    const auto flat = [&](std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        return ((i * n12 + j) * n3 + k) * nf + l;
    };
    for (std::size_t i = 0; i < n12; ++i)
        for (std::size_t j = 0; j < n12; ++j)
            for (std::size_t k = 0; k < n3; ++k) {
                const double T = g12[i] + g12[j] + g3[k];
                if (!(T > 1e-12)) continue;
                const double factor = eval.response_factor(eval.theta(g12[i], g12[j], g3[k]));
                for (std::size_t l = 0; l < nf; ++l)
                    values[flat(i, j, k, l)] =
                        eval.profit(g12[i], g12[j], g3[k], gf[l], factor, c1s[l]);
            }

    // Best grid points, skipping direct neighbours of already chosen seeds.
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t pool = std::min<std::size_t>(order.size(), 4096);
    const auto better = [&](std::size_t a, std::size_t b) {
        return values[a] > values[b] || (values[a] == values[b] && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pool),
                      order.end(), better);
    const auto unflat = [&](std::size_t idx) {
        std::array<long, kDims> out{};
        out[3] = static_cast<long>(idx % nf);
        idx /= nf;
        out[2] = static_cast<long>(idx % n3);
        idx /= n3;
        out[1] = static_cast<long>(idx % n12);
        out[0] = static_cast<long>(idx / n12);
        return out;
    };
    std::vector<std::array<long, kDims>> seeds;
    for (std::size_t s = 0; s < pool && seeds.size() < static_cast<std::size_t>(search.top_n); ++s) {
        if (!std::isfinite(values[order[s]])) break;
        const auto cand = unflat(order[s]);
        const bool near = std::any_of(seeds.begin(), seeds.end(), [&](const auto& chosen) {
            for (int d = 0; d < kDims; ++d)
                if (std::abs(chosen[d] - cand[d]) > 1) return false;
            return true;
        });
        if (!near) seeds.push_back(cand);
    }
    if (seeds.empty()) throw InfeasibleProblem("no feasible grid point with T > 0");

    const auto spacing = [](const std::vector<double>& g) {
        return g.size() > 1 ? g[1] - g[0] : 0.0;
    };
    const Point scale{spacing(g12), spacing(g12), spacing(g3), spacing(gf)};

    std::optional<Scored> best;
    for (const auto& s : seeds) {
        Point x{g12[static_cast<std::size_t>(s[0])], g12[static_cast<std::size_t>(s[1])],
                g3[static_cast<std::size_t>(s[2])], gf[static_cast<std::size_t>(s[3])]};
        Scored cur{x, eval(x)};
        Point simplex_scale = scale;
        for (int restart = 0; restart < 6; ++restart) {
            const Scored next =
                nelder_mead(eval, box, cur, simplex_scale, search.tolerance, search.max_iterations);
            const double gain = next.f - cur.f;
            cur = next.f > cur.f ? next : cur;
            if (gain <= search.tolerance * std::max(1.0, std::abs(cur.f))) break;
            for (double& v : simplex_scale) v *= 0.25;
        }
        Point cstep = scale;
        for (double& v : cstep) v *= 0.25;
        cur = compass(eval, box, cur, cstep);
        cur = snap_to_bounds(eval, box, cur);
        if (!best || preferred(cur, *best)) best = cur;
    }

    M2Solution out;
    out.policy = {best->x[0], best->x[1], best->x[2]};
    out.fee = best->x[3];
    out.profit = best->f;

    const bool fee_at_bound = std::abs(out.fee - p.f_min) <= 1e-6 || std::abs(out.fee - p.f_max) <= 1e-6;
    out.branch = (fee_at_bound || out.policy.t3 >= p.tau - 1e-9) ? M2Branch::NumericBoundary
                                                                : M2Branch::NumericInterior;

    // Cross-check against the closed forms where they apply.
    if (problem.has_closed_forms() && out.policy.t1 <= 1e-6 && out.policy.t2 <= 1e-6 &&
        out.policy.t3 < p.tau - 1e-6) {
        const FeeRegime regime = fee_at_bound ? FeeRegime::boundary(out.fee) : FeeRegime::interior();
        try {
            const ClosedFormPoint cf = closed_form_t3(problem, regime);
            if (std::abs(cf.t3 - out.policy.t3) <= 1e-3) {
                const ShipmentPolicy cfp{0.0, 0.0, cf.t3};
                const double f = eval(Point{0.0, 0.0, cf.t3, cf.fee});
                if (f >= out.profit - 1e-9) {
                    out.policy = cfp;
                    out.fee = cf.fee;
                    out.profit = f;
                }
                out.branch = fee_at_bound ? M2Branch::ClosedFormBoundaryFee
                                          : M2Branch::ClosedFormInteriorFee;
            }
        } catch (const RegimeViolation&) {
        }
    }
    out.lambda_p_eq = problem.equilibrium_demand(out.policy, out.fee);
    return out;
}

// --- closed forms -----------------------------------------------------------

ClosedFormPoint closed_form_t3(const M2Problem& problem, const FeeRegime& regime) {
    if (!problem.has_closed_forms()) {
        throw UnsupportedSignal("closed forms need the MDT signal, linear N(F) and c2 = 1");
    }
    const MarketParams& p = problem.params;
    const double a = problem.fee_model.a;
    const double b = problem.fee_model.b;
    const double delta = problem.fee_model.delta;
    const double tau = p.tau;

    ClosedFormPoint out;
    if (regime.kind == FeeRegime::Kind::Boundary) {
        const double fee = regime.fee;
        const double n = a - b * fee;
        if (!(n > 0)) throw RegimeViolation("no premium market at this fee");
        const double B = delta * p.M * p.r + fee;
        const double Q = delta * delta * p.M * p.M * p.M * p.h * p.h * p.K * tau;
        const double radicand = Q * (4.0 * n * B * B * B + 27.0 * Q);
        if (radicand < 0) throw RegimeViolation("negative radicand in boundary-fee closed form");
        const double X = n * n * (2.0 * n * B * B * B + 27.0 * Q);
        const double Y = 3.0 * std::sqrt(3.0) * n * n * std::sqrt(radicand);
        const double root = std::cbrt(X + Y);
        out.t3 = (2.0 * n * B + std::cbrt(16.0) * n * n * B * B / root + std::cbrt(4.0) * root) /
                 (6.0 * delta * p.M * p.h * n);
        out.fee = fee;
    } else {
        const double P = a + b * delta * p.M * p.r;
        const double Q = b * delta * p.M * p.h / 2.0;
        if (!(P > 0) || !(Q > 0)) throw RegimeViolation("interior-fee closed form undefined");
        // With t = (P / Q) x the condition becomes 3x^4 - 4x^3 + x^2 + kappa = 0.
        const double kappa = 4.0 * b * p.M * tau * p.K * Q * Q / (P * P * P * P);
        const auto roots = quartic_roots(-4.0 / 3.0, 1.0 / 3.0, 0.0, kappa / 3.0);
        const double lo = 1.0 / 3.0;
        const double hi = 0.5 + std::sqrt(3.0) / 6.0;
        std::optional<double> x;
        for (const cplx& z : roots) {
            if (std::abs(z.imag()) > 1e-7) continue;
            if (z.real() > lo && z.real() < hi && (!x || z.real() < *x)) x = z.real();
        }
        if (!x) throw RegimeViolation("no interior-fee stationary point");
        // Newton polish on the scaled quartic.
        for (int i = 0; i < 4; ++i) {
            const double v = *x;
            const double g = 3 * v * v * v * v - 4 * v * v * v + v * v + kappa;
            const double dg = 12 * v * v * v - 12 * v * v + 2 * v;
            if (dg == 0) break;
            x = v - g / dg;
        }
        out.t3 = P / Q * *x;
        out.fee = (a - b * delta * p.M * (p.r - p.h * out.t3 / 2.0)) / (2.0 * b);
        if (!(out.fee > p.f_min && out.fee < p.f_max)) {
            throw RegimeViolation("interior fee falls outside (f_min, f_max)");
        }
    }
    if (!(out.t3 > 0) || !(out.t3 < tau)) {
        throw RegimeViolation("closed-form t3 is not below tau");
    }
    return out;
}

// --- structure --------------------------------------------------------------

StructureReport check_lemma2(const M2Problem& problem, const M2Solution& sol, double tol) {
    StructureReport rep;
    const ShipmentPolicy& s = sol.policy;
    const double tau = problem.params.tau;
    const double bound = problem.params.r / problem.params.h;
    rep.structure_enforced = problem.signal.kind == SignalKind::MDT;
    rep.phase2_needs_phase1 = !(s.t1 <= tol && s.t2 > tol);
    rep.slack_needs_no_phase1 = !(s.t3 < tau - tol && s.t1 > tol);
    rep.t1_within_bound = s.t1 <= bound + tol;
    if (!rep.phase2_needs_phase1) {
        rep.findings.push_back("t2 = " + std::to_string(s.t2) + " > 0 while t1 = 0");
    }
    if (!rep.slack_needs_no_phase1) {
        rep.findings.push_back("t1 = " + std::to_string(s.t1) + " > 0 while t3 < tau");
    }
    if (!rep.t1_within_bound) {
        rep.findings.push_back("t1 = " + std::to_string(s.t1) + " exceeds r/h = " +
                               std::to_string(bound));
    }
    return rep;
}

// --- recoverability ---------------------------------------------------------

std::string_view to_string(RecoveryClass c) {
    switch (c) {
        case RecoveryClass::OptEq: return "Opt-Eq";
        case RecoveryClass::NonOptEq: return "Non-opt-Eq";
        case RecoveryClass::Cycles: return "Cycles";
        case RecoveryClass::Undetermined: return "Undetermined";
    }
    return "?";
}

FeedbackSystem feedback_system_for(const M2Problem& problem, double fee) {
    return FeedbackSystem{problem.params, problem.fee_model, problem.response, problem.signal,
                          fee};
}

double cycle_average_profit(const DynamicsTrace& trace) {
    const auto& rows = trace.iterations;
    if (trace.classification.kind != LongRunKind::Cycle2 || rows.size() < 2) {
        throw InvalidParams("trace does not end in a 2-cycle");
    }
    const IterationRecord& a = rows[rows.size() - 1];
    const IterationRecord& b = rows[rows.size() - 2];
    const double Ta = a.policy.cycle_length();
    const double Tb = b.policy.cycle_length();
    return (a.profit * Ta + b.profit * Tb) / (Ta + Tb);
}

RecoveryReport recoverability(const M2Problem& problem, const M2Solution& sol,
                              const RecoveryOptions& options) {
    const FeedbackSystem sys = feedback_system_for(problem, sol.fee);
    const double c1 = sys.potential();

    RecoveryReport rep;
    rep.lambda_p_eq = sol.lambda_p_eq;
    rep.m2_profit = sol.profit;
    rep.trace = simulate(sys, c1, {options.max_iters, options.sim_tol, true});
    const LongRunClass& cls = rep.trace.classification;
    const IterationRecord& last = rep.trace.iterations.back();

    switch (cls.kind) {
        case LongRunKind::ConvergedToPotential:
        case LongRunKind::ConvergedInterior: {
            rep.long_run_lambda_p = cls.limit;
            rep.long_run_profit = last.profit;
            const bool same_demand = std::abs(cls.limit - sol.lambda_p_eq) <=
                                     options.match_tol * std::max(1.0, sol.lambda_p_eq);
            const bool same_profit = std::abs(last.profit - sol.profit) <=
                                     options.match_tol * std::max(1.0, std::abs(sol.profit));
            rep.label = same_demand && same_profit ? RecoveryClass::OptEq : RecoveryClass::NonOptEq;
            break;
        }
        case LongRunKind::Cycle2:
            rep.long_run_lambda_p = (cls.cycle_high + cls.cycle_low) / 2.0;
            rep.long_run_profit = cycle_average_profit(rep.trace);
            rep.label = RecoveryClass::Cycles;
            break;
        case LongRunKind::Undetermined:
            rep.long_run_lambda_p = last.lambda_p;
            rep.long_run_profit = last.profit;
            rep.label = RecoveryClass::Undetermined;
            break;
    }
    rep.shortfall = rep.long_run_profit != 0.0 ? sol.profit / rep.long_run_profit - 1.0
                                               : std::numeric_limits<double>::quiet_NaN();

    if (problem.signal.kind == SignalKind::MDT && problem.response.c2 == 1.0) {
        DemandLimitCheck chk;
        const double threshold = problem.params.binding_threshold();
        chk.equality_expected = c1 <= threshold;
        chk.lambda_bar_predicted =
            chk.equality_expected ? c1 : c1 * std::cbrt(threshold / c1);
        const double tol = 1e-3 * std::max(1.0, sol.lambda_p_eq);
        const bool sim_matches = std::abs(rep.long_run_lambda_p - chk.lambda_bar_predicted) <= tol;
        chk.holds = sim_matches &&
                    (chk.equality_expected
                         ? std::abs(rep.long_run_lambda_p - sol.lambda_p_eq) <= tol
                         : chk.lambda_bar_predicted <= sol.lambda_p_eq + tol);
        rep.demand_limit = chk;
    }
    return rep;
}

}  // namespace womops
