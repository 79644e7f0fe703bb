#include "lsv/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "lsv/error.hpp"
#include "lsv/kernels.hpp"
#include "lsv/pricer.hpp"
#include "lsv/quadrature.hpp"
#include "lsv/symcalc.hpp"

namespace lsv {

namespace {

constexpr double kPi = std::numbers::pi;

// Adaptive Gauss-Kronrod; depth is capped because tolerances near machine
// precision would otherwise bisect down to the noise floor.
double gk(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 6, tol);
}

class Checker {
public:
    explicit Checker(std::string name) { r_.name = std::move(name); }

    // Passes when err <= tol; a NaN error always fails.
    template <class Msg>
    void check(double err, double tol, Msg&& what) {
        ++r_.checks;
        const double ratio = tol > 0.0 ? err / tol : (err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        if (!(err <= tol)) {
            ++r_.failures;
            if (r_.messages.size() < 5) {
                char buf[96];
                std::snprintf(buf, sizeof buf, ": error %.3e > %.1e", err, tol);
                r_.messages.push_back(what() + buf);
            }
        }
        r_.worst = std::isnan(ratio) ? std::numeric_limits<double>::infinity() : std::max(r_.worst, ratio);
    }

    SuiteResult& result() { return r_; }

private:
    SuiteResult r_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// Heston x-sector at ybar = 0.04, a CEV-like sector, and one with positive drift.
const Frozen kSectors[] = {{-0.02, 0.02}, {-0.0303, 0.0303}, {0.1, 0.05}};

// ---------------------------------------------------------------------------

void orthonormality(Checker& c) {
    for (const Frozen& fx : kSectors) {
        const IntervalBasis ib{-0.3, 0.9, fx};
        for (int l = 1; l <= 10; ++l)
            for (int k = l; k <= 10; ++k) {
                const double ip =
                    gk([&](double z) { return ib.eigenfunction(l, z) * ib.eigenfunction(k, z) * ib.weight(z); }, ib.L, ib.U);
                c.check(std::fabs(ip - (l == k ? 1.0 : 0.0)), 1e-10,
                        [&] { return fmt("interval <phi_%g, phi_%g>_m, b = %g", l, k, fx.b); });
                // The (0,0) coupling is the same inner product in closed form.
                for (const auto& [lp, lq] : {std::pair{l, k}, std::pair{k, l}})
                    c.check(std::fabs(interval_C(ib, lp, lq, 0, 0) - (lp == lq ? 1.0 : 0.0)), 1e-12,
                            [&] { return fmt("interval_C(%g, %g, 0, 0), b = %g", lp, lq, fx.b); });
            }
    }
    // Half-line modes form a delta family: smearing <eta_w, eta_w'>_m against
    // test(w') = w' e^{-w'^2/2} returns test(w).
    const HalfLineBasis hb{0.3, kSectors[0]};
    auto test = [](double w) { return w * std::exp(-0.5 * w * w); };
    auto smeared = [&](double x) { return gl_panels([&](double wp) { return test(wp) * hb.eigenfunction(wp, x); }, 0.0, 12.0, 24); };
    for (double w : {0.5, 1.0, 1.7, 2.5}) {
        const double v =
            gl_panels([&](double x) { return hb.weight(x) * hb.eigenfunction(w, x) * smeared(x); }, hb.L, hb.L + 12.0, 24);
        c.check(std::fabs(v - test(w)), 1e-6, [&] { return fmt("half-line smeared orthogonality at w = %g", w); });
    }
}

void eigen_relation(Checker& c) {
    // (b d + a d^2) phi = mu phi pointwise, derivatives by Richardson-extrapolated
    // central differences; error relative to a f^2 times the local envelope.
    for (const Frozen& fx : kSectors) {
        const IntervalBasis ib{0.1, 1.4, fx};
        for (int l = 1; l <= 5; ++l)
            for (int j = 0; j < 10; ++j) {
                const double z = ib.L + (j + 0.5) / 10.0 * ib.width();
                const double f = ib.frequency(l);
                const double h = std::min(0.25 / f, 0.45 * std::min(z - ib.L, ib.U - z));
                auto phi = [&](double s) { return ib.eigenfunction(l, s); };
                const double d1 = numeric_derivative(phi, z, 1, h), d2 = numeric_derivative(phi, z, 2, h);
                const double scale = (fx.a * f * f + std::fabs(fx.b) * f) * std::sqrt(2.0 / ib.width()) * std::exp(-ib.beta() * z);
                c.check(std::fabs(fx.b * d1 + fx.a * d2 - ib.eigenvalue(l) * phi(z)) / scale, 1e-9,
                        [&] { return fmt("interval eigen relation l = %g at z = %g", l, z); });
            }
        const HalfLineBasis hb{0.1, fx};
        for (double w : {0.3, 1.0, 3.0, 8.0, 20.0})
            for (int j = 0; j < 2; ++j) {
                const double z = hb.L + 0.05 + 0.7 * j;
                const double h = std::min(0.25 / w, 0.02);
                auto eta = [&](double s) { return hb.eigenfunction(w, s); };
                const double d1 = numeric_derivative(eta, z, 1, h), d2 = numeric_derivative(eta, z, 2, h);
                const double scale = (fx.a * w * w + std::fabs(fx.b) * w + fx.b * fx.b / fx.a) * std::exp(-hb.beta() * z);
                c.check(std::fabs(fx.b * d1 + fx.a * d2 - hb.eigenvalue(w) * eta(z)) / scale, 1e-9,
                        [&] { return fmt("half-line eigen relation w = %g at z = %g", w, z); });
            }
    }
}

void chapman_kolmogorov(Checker& c) {
    // P(t2) P(t1) g = P(t1 + t2) g for the truncated interval kernel; the inner
    // projection is done by quadrature, so completeness is exercised too.
    for (const Frozen& fx : {kSectors[0], kSectors[2]}) {
        const IntervalBasis ib{0.0, 1.0, fx};
        const double t1 = 0.03, t2 = 0.05;
        const double rate = -std::log(1e-17) / std::min(t1, t2) - fx.b * fx.b / (4.0 * fx.a);
        const int M = static_cast<int>(std::ceil(ib.width() / kPi * std::sqrt(rate / fx.a)));
        auto g = [](double z) { return z * (1.0 - z) * std::exp(-(z - 0.4) * (z - 0.4) / 0.02); };
        auto project = [&](const std::function<double(double)>& f) {
            std::vector<double> out(static_cast<std::size_t>(M));
            for (int l = 1; l <= M; ++l)
                out[static_cast<std::size_t>(l - 1)] =
                    gk([&](double z) { return ib.eigenfunction(l, z) * ib.weight(z) * f(z); }, ib.L, ib.U, 1e-14);
            return out;
        };
        auto evolve = [&](const std::vector<double>& coef, double t, double z) {
            double s = 0.0;
            for (int l = 1; l <= M; ++l)
                s += ib.eigenfunction(l, z) * std::exp(ib.eigenvalue(l) * t) * coef[static_cast<std::size_t>(l - 1)];
            return s;
        };
        const auto cg = project(g);
        const auto cmid = project([&](double z) { return evolve(cg, t1, z); });
        for (int j = 1; j < 20; ++j) {
            const double z = j / 20.0;
            const double two = evolve(cmid, t2, z), one = evolve(cg, t1 + t2, z);
            c.check(std::fabs(two - one), 1e-7, [&] { return fmt("composition at z = %g (b = %g)", z, fx.b); });
        }
    }
}

void kernel_coefficients(Checker& c) {
    // interval_C against direct quadrature over l', l <= 8, i, k <= 2, relative
    // to the largest entry of each (i, k) table.
    for (const Frozen& fx : kSectors)
        for (double center : {0.0, 0.35}) {
            const IntervalBasis ib{-0.4, 1.1, fx};
            const double nrm = std::sqrt(2.0 / ib.width());
            for (int i = 0; i <= 2; ++i)
                for (int k = 0; k <= 2; ++k) {
                    double table[8][8], quad[8][8], big = 0.0;
                    for (int lp = 1; lp <= 8; ++lp)
                        for (int l = 1; l <= 8; ++l) {
                            const std::complex<double> e(-ib.beta(), ib.frequency(l));
                            const std::complex<double> ek = std::pow(e, k);
                            auto integrand = [&](double z) {
                                const double arg = ib.frequency(l) * (z - ib.L);
                                const double dk = nrm * std::exp(-ib.beta() * z) * (ek.imag() * std::cos(arg) + ek.real() * std::sin(arg));
                                return ib.eigenfunction(lp, z) * std::pow(z - center, i) * dk * ib.weight(z);
                            };
                            quad[lp - 1][l - 1] = gk(integrand, ib.L, ib.U, 1e-14);
                            table[lp - 1][l - 1] = interval_C(ib, lp, l, i, k, center);
                            big = std::max(big, std::fabs(quad[lp - 1][l - 1]));
                        }
                    for (int lp = 0; lp < 8; ++lp)
                        for (int l = 0; l < 8; ++l)
                            c.check(std::fabs(table[lp][l] - quad[lp][l]) / big, 1e-10, [&] {
                                return fmt("interval_C(%g, %g) ", lp + 1, l + 1) + fmt("i = %g k = %g b = %g", i, k, fx.b);
                            });
                }
        }
    // trig_moment against quadrature, m <= 6, l', l <= 8.
    for (int m = 0; m <= 6; ++m)
        for (int lp = 1; lp <= 8; ++lp)
            for (int l = 1; l <= 8; ++l) {
                const double ss = gk([&](double x) { return std::pow(x, m) * std::sin(lp * x) * std::sin(l * x); }, 0, kPi, 1e-14);
                const double sc = gk([&](double x) { return std::pow(x, m) * std::sin(lp * x) * std::cos(l * x); }, 0, kPi, 1e-14);
                c.check(std::fabs(trig_moment(m, lp, l, TrigKind::sin_sin) - ss), 1e-11,
                        [&] { return fmt("trig_moment sin-sin m = %g (%g, %g)", m, lp, l); });
                c.check(std::fabs(trig_moment(m, lp, l, TrigKind::sin_cos) - sc), 1e-11,
                        [&] { return fmt("trig_moment sin-cos m = %g (%g, %g)", m, lp, l); });
            }
}

PriceRequest make_request(const BuiltinModel& m, double rho, Claim claim, double x, double y, int order) {
    return PriceRequest{make_model(m, rho), std::move(claim), 0.0, x, y, order, {}};
}

void vanishing_corrections(Checker& c) {
    const Claim claims[] = {{Payoff::call(0.62), {}, 0.25},
                            {Payoff::call(0.62), Interval::between(0.4, 0.8), 0.25},
                            {Payoff::put(0.62), Interval::above(0.45), 0.25},
                            {Payoff::digital(0.62), Interval::below(0.9), 0.25}};
    for (const Claim& claim : claims) {
        const double u0 = price(make_request(Gbm{0.2}, -0.5, claim, 0.62, 0.04, 0)).total;
        for (int N = 1; N <= 4; ++N) {
            const auto r = price(make_request(Gbm{0.2}, -0.5, claim, 0.62, 0.04, N));
            c.check(std::fabs(r.total - u0), 0.0, [&] { return fmt("GBM order %g minus order 0 (L = %g, U = %g)", N, claim.barriers.lower, claim.barriers.upper); });
            for (const auto& [nk, v] : r.contributions)
                if (nk != std::pair{0, 0})
                    c.check(std::fabs(v), 0.0, [&] { return fmt("GBM contribution (%g, %g)", nk.first, nk.second); });
        }
    }
}

void realness(Checker& c) {
    const Heston h{1.15, 0.04, 0.2};
    const Cev cev{0.32, 0.019};
    const PriceRequest reqs[] = {
        make_request(h, -0.4, {Payoff::put(0.62), {}, 0.083}, 0.62, 0.04, 2),
        make_request(h, -0.4, {Payoff::call(0.62), Interval::between(0.0, 0.8), 0.083}, 0.62, 0.04, 2),
        make_request(h, -0.4, {Payoff::put(0.62), Interval::between(0.5, 1.0), 0.083}, 0.62, 0.04, 2),
        make_request(h, -0.4, {Payoff::put(0.62), Interval::above(0.5), 0.083}, 0.62, 0.04, 2),
        make_request(cev, 0.0, {Payoff::call(0.62), Interval::between(0.0, 0.8), 0.083}, 0.62, 0.0, 2),
        make_request(cev, 0.0, {Payoff::call(0.62), {}, 0.083}, 0.62, 0.0, 2),
    };
    for (const auto& req : reqs) {
        const auto r = price(req);
        c.check(r.diagnostics.imag_residual / (std::fabs(r.total) + 1.0), 1e-9, [&] {
            return "imaginary residual on the " + to_string(r.diagnostics.route) + " route" +
                   fmt(" (L = %g, U = %g)", req.claim.barriers.lower, req.claim.barriers.upper);
        });
    }
}

using Big = boost::multiprecision::cpp_bin_float_50;

// exp(tau z)[x_0..x_n] = sum_{k >= n} tau^k / k! h_{k-n}(x) with complete
// homogeneous symmetric polynomials h, in 50-digit arithmetic.
double divided_difference_reference(const std::vector<double>& nodes, double tau) {
    const std::size_t n = nodes.size() - 1;
    const int K = 400;
    std::vector<Big> h(K + 1, Big(0));
    h[0] = 1;
    for (double x : nodes) {
        const Big bx(x);
        for (int j = 1; j <= K; ++j) h[j] += bx * h[j - 1];
    }
    Big sum = 0, term = 1;  // tau^k / k!
    const Big bt(tau);
    for (std::size_t k = 1; k <= n; ++k) term = term * bt / Big(k);
    for (int j = 0; j <= K; ++j) {
        sum += term * h[j];
        term = term * bt / Big(static_cast<int>(n) + j + 1);
    }
    return static_cast<double>(sum);
}

void confluence_continuity(Checker& c) {
    const double tau = 0.7;
    const SimplexOptions opt;
    const double hsw = opt.confluence_sep / tau;  // spread at the branch switch
    const double L = -12.0;  // every node stays a decay rate
    const double spreads[] = {0.0, 1e-14, 1e-10, 1e-6, 1e-3, hsw * (1 - 1e-9), hsw * (1 + 1e-9), 2 * hsw, 5.0};
    for (double s : spreads) {
        const std::vector<std::vector<double>> sets = {
            {L, L + s}, {L, L + s, L + 2 * s}, {L, L, L + s}, {L, L + s, L + s, L - s}, {L - 7.0, L + s, L}};
        for (const auto& nodes : sets) {
            std::vector<double> v = nodes;
            const double got = exp_divided_difference(v, tau, opt);
            const double want = divided_difference_reference(nodes, tau);
            c.check(std::fabs(got - want) / std::fabs(want), 1e-12,
                    [&] { return fmt("divided difference of %g nodes, spread %g", static_cast<double>(nodes.size()), s); });
            std::vector<cplx> cn(nodes.begin(), nodes.end());
            c.check(std::abs(exp_divided_difference(cn, tau, opt) - got) / std::fabs(want), 1e-13,
                    [&] { return fmt("complex nodes agree with real nodes, spread %g", s); });
        }
    }
    // Straddling the switch moves the value by no more than its own slope.
    const TimePoly p = TimePoly::variable(1, 0) + TimePoly::constant(1, 0.5);
    for (double eps : {1e-9, 1e-6}) {
        const cplx below[] = {L, L + hsw * (1.0 - eps)};
        const cplx above[] = {L, L + hsw * (1.0 + eps)};
        const cplx vb = simplex_integrate(p, below, 0.0, tau, opt), va = simplex_integrate(p, above, 0.0, tau, opt);
        c.check(std::abs(va - vb) / std::abs(va), 4.0 * eps, [&] { return fmt("simplex integral across the switch, eps %g", eps); });
    }
}

cplx evaluate(const PolyExp& e, cplx v, std::span<const double> r) {
    cplx s = 0.0;
    for (const auto& [m, coef] : e.terms) s += coef(r) * std::pow(v, m);
    return s * std::exp(e.alpha(r) * v + e.beta(r) * v * v);
}

void symcalc_recursions(Checker& c) {
    // Moment recursion H_{n+1} = alpha H_n + 2 n beta H_{n-1} and its symbolic twin.
    const double none[1] = {0.0};
    const std::span<const double> r0(none, 0);
    for (const auto& [alpha, beta] : {std::pair{cplx(0.4, 1.1), cplx(-0.6, 0.2)}, std::pair{cplx(-2.0, 0.0), cplx(-0.01, 0.0)},
                                      std::pair{cplx(0.0, 3.0), cplx(-1.5, -0.5)}}) {
        const auto g = PolyExp::gaussian(TimePoly::constant(0, alpha), TimePoly::constant(0, beta));
        for (int n = 0; n <= 10; ++n) {
            const cplx H = gaussian_moment(n, alpha, beta);
            const cplx sym = eval_at_zero(differentiate(g, n))(r0);
            c.check(std::abs(sym - H) / (1.0 + std::abs(H)), 1e-12, [&] { return fmt("moment H_%g symbolic vs recursive", n); });
            if (n >= 1) {
                const cplx next = gaussian_moment(n + 1, alpha, beta);
                const cplx rec = alpha * H + 2.0 * n * beta * gaussian_moment(n - 1, alpha, beta);
                c.check(std::abs(next - rec) / (1.0 + std::abs(next)), 1e-13, [&] { return fmt("moment recursion at n = %g", n); });
            }
        }
    }
    // Leibniz rule on random expressions in two time variables, compared by value.
    std::mt19937 gen(20240611);
    std::uniform_int_distribution<int> coef(-3, 3), power(0, 2);
    auto random_poly = [&] {
        TimePoly p(2);
        for (int q = 0; q < 3; ++q) p.add_term({power(gen), power(gen)}, cplx(coef(gen), coef(gen)));
        return p;
    };
    auto random_expr = [&] {
        const PolyExp e = PolyExp::gaussian(random_poly() * cplx(0.1), TimePoly::constant(2, -0.3) + random_poly() * cplx(0.01));
        return add(multiply_power(e, 0, cplx(coef(gen), 1.0)), multiply_power(e, 2, cplx(coef(gen), -0.5)));
    };
    const double rs[] = {0.13, 0.41};
    for (int trial = 0; trial < 6; ++trial) {
        const PolyExp a = random_expr(), b = random_expr();
        for (int n = 1; n <= 4; ++n) {
            const PolyExp lhs = differentiate(multiply(a, b), n);
            PolyExp rhs;
            double binom = 1.0;
            for (int j = 0; j <= n; ++j) {
                const PolyExp t = multiply_power(multiply(differentiate(a, j), differentiate(b, n - j)), 0, binom);
                rhs = j == 0 ? t : add(rhs, t);
                binom = binom * (n - j) / (j + 1);
            }
            for (cplx v : {cplx(0.3, -0.2), cplx(-1.1, 0.5)}) {
                const cplx x = evaluate(lhs, v, rs), y = evaluate(rhs, v, rs);
                c.check(std::abs(x - y) / (1.0 + std::abs(x)), 1e-12, [&] { return fmt("Leibniz rule order %g, trial %g", n, trial); });
            }
        }
    }
}

struct SuiteDef {
    const char* name;
    void (*run)(Checker&);
};

const SuiteDef kSuites[] = {
    {"orthonormality", orthonormality},
    {"eigen-relation", eigen_relation},
    {"chapman-kolmogorov", chapman_kolmogorov},
    {"kernel-coefficients", kernel_coefficients},
    {"vanishing-corrections", vanishing_corrections},
    {"realness", realness},
    {"confluence-continuity", confluence_continuity},
    {"symcalc-recursions", symcalc_recursions},
};

}  // namespace

bool SelftestReport::passed() const noexcept {
    return !suites.empty() && std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed(); });
}

const std::vector<std::string>& selftest_suites() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& s : kSuites) v.emplace_back(s.name);
        return v;
    }();
    return names;
}

SuiteResult run_suite(const std::string& name) {
    for (const auto& s : kSuites) {
        if (name != s.name) continue;
        Checker c(name);
        const auto start = std::chrono::steady_clock::now();
        try {
            s.run(c);
        } catch (const std::exception& e) {
            ++c.result().failures;
            c.result().messages.push_back(std::string("exception: ") + e.what());
        }
        c.result().seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return c.result();
    }
    throw InvalidArgument("unknown selftest suite '" + name + "'");
}

SelftestReport selftest(const std::vector<std::string>& names) {
    SelftestReport report;
    for (const auto& n : names.empty() ? selftest_suites() : names) report.suites.push_back(run_suite(n));
    return report;
}

}  // namespace lsv
