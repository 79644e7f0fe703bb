#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "lsv/error.hpp"
#include "lsv/kernels.hpp"
#include "lsv/quadrature.hpp"

using namespace lsv;

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
double gk(F f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 10, 1e-13);
}

// Heston x-sector at ybar = 0.04: b = -ybar/2, a = ybar/2.
const Frozen kHestonX{-0.02, 0.02};
const Frozen kGbmX{-0.02, 0.02};

// k-th derivative of e^{-beta x} sin(w (x - L)) by repeated symbolic product rule,
// tracked as e^{-beta x}(A cos + B sin).
std::pair<double, double> symbolic_deriv(double beta, double w, int k) {
    double A = 0.0, B = 1.0;  // cos, sin coefficients
    for (int q = 0; q < k; ++q) {
        const double nA = -beta * A + w * B;
        const double nB = -beta * B - w * A;
        A = nA;
        B = nB;
    }
    return {A, B};
}

}  // namespace

TEST_CASE("eigenvalues") {
    const IntervalBasis ib{0.0, kPi, {0.0, 2.0}};
    CHECK(ib.eigenvalue(1) == doctest::Approx(-2.0));
    const FourierBasis fb{kHestonX};
    const cplx mu = fb.eigenvalue(1.0);
    CHECK(mu.real() == doctest::Approx(-0.02));
    CHECK(mu.imag() == doctest::Approx(-0.02));
    const HalfLineBasis hb{0.0, kHestonX};
    CHECK(hb.beta() == doctest::Approx(-0.5));
    CHECK(hb.eigenvalue(1.0) == doctest::Approx(-0.02 * 0.02 / 0.08 - 0.02));
}

TEST_CASE("interval eigenfunctions vanish at the barriers and are orthonormal") {
    const IntervalBasis ib{-0.3, 0.9, kHestonX};
    for (int l = 1; l <= 10; ++l) {
        CHECK(std::abs(ib.eigenfunction(l, ib.L)) < 1e-15);
        CHECK(std::abs(ib.eigenfunction(l, ib.U)) < 1e-13);
        for (int lp = 1; lp <= 10; ++lp) {
            const double ip = gk([&](double z) { return ib.eigenfunction(lp, z) * ib.eigenfunction(l, z) * ib.weight(z); },
                                 ib.L, ib.U);
            CHECK(std::abs(ip - (l == lp ? 1.0 : 0.0)) < 1e-10);
        }
    }
    CHECK_THROWS_AS(ib.eigenfunction(1, 1.0), InvalidArgument);
}

TEST_CASE("interval eigen relation by finite differences") {
    const IntervalBasis ib{0.1, 1.4, {0.3, 0.07}};
    const double z = 0.77, h = 1e-4;
    for (int l = 1; l <= 4; ++l) {
        auto f = [&](double x) { return ib.eigenfunction(l, x); };
        const double Af = ib.x.b * (f(z + h) - f(z - h)) / (2 * h) + ib.x.a * (f(z + h) - 2 * f(z) + f(z - h)) / (h * h);
        CHECK(Af == doctest::Approx(ib.eigenvalue(l) * f(z)).epsilon(1e-6));
    }
}

TEST_CASE("derivative coefficients") {
    for (double beta : {-0.5, 0.0, 1.3})
        for (double w : {0.7, 3.0})
            for (int k : {0, 1, 2, 3, 5}) {
                const auto c = deriv_coeffs(beta, w, k);
                const auto [A, B] = symbolic_deriv(beta, w, k);
                CHECK(c.c_odd == doctest::Approx(A).epsilon(1e-13));
                CHECK(c.c_even == doctest::Approx(B).epsilon(1e-13));
            }
    const IntervalBasis ib{0.0, 2.0, kHestonX};
    CHECK(deriv_coeffs(ib, 1, 0).normalization == doctest::Approx(1.0));
    CHECK_THROWS_AS(deriv_coeffs(0.1, 1.0, -1), InvalidArgument);
}

TEST_CASE("trig moments") {
    CHECK(trig_moment(0, 1, 1, TrigKind::sin_sin) == doctest::Approx(kPi / 2));
    CHECK(std::abs(trig_moment(0, 2, 1, TrigKind::sin_sin)) < 1e-15);
    CHECK(trig_moment(1, 1, 1, TrigKind::sin_sin) == doctest::Approx(kPi * kPi / 4));
    for (int m = 0; m <= 6; ++m)
        for (int lp = 1; lp <= 8; ++lp)
            for (int l = 1; l <= 8; ++l) {
                const double ss = gk([&](double x) { return std::pow(x, m) * std::sin(lp * x) * std::sin(l * x); }, 0, kPi);
                const double sc = gk([&](double x) { return std::pow(x, m) * std::sin(lp * x) * std::cos(l * x); }, 0, kPi);
                const double scale = std::pow(kPi, m + 1);
                CHECK(std::abs(trig_moment(m, lp, l, TrigKind::sin_sin) - ss) < 1e-11 * scale);
                CHECK(std::abs(trig_moment(m, lp, l, TrigKind::sin_cos) - sc) < 1e-11 * scale);
            }
    CHECK_THROWS_AS(TrigMoments(2, 3).cos_moment(3, 0), InvalidArgument);
}

TEST_CASE("interval coupling against quadrature") {
    const IntervalBasis ib{-0.4, 1.1, kGbmX};
    // (0,0) is the identity by orthonormality.
    for (int lp = 1; lp <= 5; ++lp)
        for (int l = 1; l <= 5; ++l)
            CHECK(std::abs(interval_C(ib, lp, l, 0, 0) - (lp == l ? 1.0 : 0.0)) < 1e-13);
    for (double center : {0.0, 0.35})
        for (int i = 0; i <= 3; ++i)
            for (int k = 0; k <= 3; ++k)
                for (int lp = 1; lp <= 4; ++lp)
                    for (int l = 1; l <= 4; ++l) {
                        const auto [A, B] = symbolic_deriv(ib.beta(), ib.frequency(l), k);
                        const double nrm = std::sqrt(2.0 / ib.width());
                        auto integrand = [&](double z) {
                            const double arg = ib.frequency(l) * (z - ib.L);
                            const double dk = nrm * std::exp(-ib.beta() * z) * (A * std::cos(arg) + B * std::sin(arg));
                            return ib.eigenfunction(lp, z) * std::pow(z - center, i) * dk * ib.weight(z);
                        };
                        const double q = gk(integrand, ib.L, ib.U);
                        const double v = interval_C(ib, lp, l, i, k, center);
                        CHECK(std::abs(v - q) <= 1e-10 * std::max(1.0, std::abs(q)));
                    }
    const IntervalCTable table(ib, 2, 1, 0.35, 6);
    CHECK(table(3, 5) == doctest::Approx(interval_C(ib, 3, 5, 2, 1, 0.35)).epsilon(1e-14));
    CHECK(table.row(2)[3] == table(2, 4));
    CHECK_THROWS_AS(interval_C(ib, 0, 1, 0, 0), InvalidArgument);
}

TEST_CASE("coupling perturbation hook") {
    const IntervalBasis ib{0.0, 1.0, kGbmX};
    const double base = interval_C(ib, 2, 3, 1, 1);
    set_interval_C_perturbation(1e-3);
    CHECK(interval_C(ib, 2, 3, 1, 1) == doctest::Approx(base * 1.001).epsilon(1e-14));
    set_interval_C_perturbation(0.0);
    CHECK(interval_C(ib, 2, 3, 1, 1) == base);
}

TEST_CASE("finite part integrals") {
    // fp int_{-1}^{2} 1/x^2 dx = -1/2 - 1.
    auto one = [](double) { return 1.0; };
    CHECK(hadamard_finite_part(one, 0.0, 1, -1.0, 2.0) == doctest::Approx(-1.5).epsilon(1e-10));
    // PV int_{-1}^{2} 1/x dx = log 2.
    CHECK(hadamard_finite_part(one, 0.0, 0, -1.0, 2.0) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    // Odd integrand on a symmetric interval.
    auto c = [](double x) { return std::cos(x); };
    CHECK(std::abs(hadamard_finite_part(c, 0.0, 2, -1.0, 1.0)) < 1e-9);
    // fp int_0^3 e^x (x - 1)^{-2} dx against the analytic Hadamard value.
    auto e = [](double x) { return std::exp(x); };
    const double fp = hadamard_finite_part(e, 1.0, 1, 0.0, 3.0);
    // Subtract e(1 + (x-1)) and integrate the remainder numerically.
    auto rem = [&](double x) {
        const double u = x - 1.0;
        if (std::abs(u) < 1e-4) return std::exp(1.0) * (0.5 + u / 6.0 + u * u / 24.0);
        return (std::exp(x) - std::exp(1.0) * (1.0 + u)) / (u * u);
    };
    const double expect = gk(rem, 0.0, 3.0) + std::exp(1.0) * ((-1.0 / 2.0 - 1.0) + std::log(2.0));
    CHECK(fp == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("half-line coupling against a mollified integral") {
    // For w' != w the pointwise coupling is the Abel limit of the damped integral.
    const HalfLineBasis hb{0.2, {-0.3, 0.4}};
    for (int i = 0; i <= 1; ++i)
        for (int k = 0; k <= 2; ++k) {
            const double wp = 1.3, w = 0.6;
            const auto [A, B] = symbolic_deriv(hb.beta(), w, k);
            // The weight cancels both exponential factors exactly.
            auto damped = [&](double eps) {
                auto f = [&](double u) {
                    const double z = hb.L + u;
                    return (2.0 / kPi) * std::sin(wp * u) * std::pow(z, i) * (A * std::cos(w * u) + B * std::sin(w * u)) *
                           std::exp(-eps * u);
                };
                const double end = 40.0 / eps, panel = 5.0;
                double s = 0.0;
                for (double a = 0.0; a < end; a += panel) s += gk(f, a, a + panel);
                return s;
            };
            // Richardson in eps: the damped integral is analytic at eps = 0.
            double tab[4][4];
            double eps = 0.04;
            for (int r = 0; r < 4; ++r, eps /= 2) {
                tab[r][0] = damped(eps);
                for (int c = 1; c <= r; ++c) tab[r][c] = (std::ldexp(1.0, c) * tab[r][c - 1] - tab[r - 1][c - 1]) / (std::ldexp(1.0, c) - 1);
            }
            const double lim = tab[3][3];
            CHECK(halfline_C(hb, wp, w, i, k) == doctest::Approx(lim).epsilon(1e-5));
        }
    CHECK_THROWS_AS(halfline_C(hb, 1.0, 1.0, 0, 0), InvalidArgument);
    const auto c = halfline_coupling(hb, 1.0, 1.0, 0, 0);
    CHECK(c.delta[0] == doctest::Approx(1.0));
}

TEST_CASE("payoff transforms") {
    const double K = 0.62;
    const IntervalBasis ib{0.0, 1.0, kHestonX};
    // Digital: closed form with beta = -1/2.
    const auto dig = Payoff::digital(K);
    for (int l = 1; l <= 6; ++l) {
        const double q = gk([&](double z) { return ib.eigenfunction(l, z) * dig(z) * ib.weight(z); }, K, ib.U);
        CHECK(interval_transform(ib, dig, l) == doctest::Approx(q).epsilon(1e-12));
    }
    const auto call = Payoff::call(K);
    const auto put = Payoff::put(K);
    for (int l = 1; l <= 6; ++l) {
        const double qc = gk([&](double z) { return ib.eigenfunction(l, z) * call(z) * ib.weight(z); }, K, ib.U);
        const double qp = gk([&](double z) { return ib.eigenfunction(l, z) * put(z) * ib.weight(z); }, ib.L, K);
        CHECK(std::abs(interval_transform(ib, call, l) - qc) < 1e-12);
        CHECK(std::abs(interval_transform(ib, put, l) - qp) < 1e-12);
    }
    // Put on the line: contour Im w = 1 inside the strip (0, inf).
    const auto strip = put.fourier_strip();
    CHECK(strip.first == 0.0);
    const cplx w(0.8, 1.0);
    const double xbar = 0.5;
    auto re = [&](double z) { return (std::exp(cplx(0, -1) * w * (z - xbar)) * put(z)).real(); };
    auto im = [&](double z) { return (std::exp(cplx(0, -1) * w * (z - xbar)) * put(z)).imag(); };
    const auto hat = fourier_transform(put, w, xbar);
    const double lo = -60.0;
    CHECK(std::abs(hat - cplx(gk(re, lo, K), gk(im, lo, K)) / std::sqrt(2 * kPi)) < 1e-11);
    CHECK_THROWS_AS(fourier_transform(put, cplx(0.8, -1.0), xbar), DivergentTransform);
}

TEST_CASE("half-line transforms") {
    const HalfLineBasis hb{0.0, kHestonX};
    CHECK_THROWS_AS(halfline_transform(hb, Payoff::call(0.62), 1.0), DivergentTransform);
    // A put has compact support on the half-line.
    const auto put = Payoff::put(0.62);
    const double q = gk([&](double z) { return hb.eigenfunction(1.4, z) * put(z) * hb.weight(z); }, 0.0, 0.62);
    CHECK(halfline_transform(hb, put, 1.4) == doctest::Approx(q).epsilon(1e-12));
}
