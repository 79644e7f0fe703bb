#pragma once

// Closed-form and semi-analytic reference prices, independent of the library's
// expansion machinery. All rates are zero; x is the log price.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>

#include <boost/math/differentiation/autodiff.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

inline double gk(const std::function<double(double)>& f, double a, double b, double tol = 1e-14) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, tol);
}

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Black-Scholes call on S with strike K.
inline double bs_call(double S, double K, double sigma, double T) {
    const double s = sigma * std::sqrt(T);
    const double d1 = (std::log(S / K) + 0.5 * s * s) / s;
    return S * norm_cdf(d1) - K * norm_cdf(d1 - s);
}

/// Down-and-out call with barrier H <= K and zero rates, by reflection:
/// C(S) - (S/H) C(H^2/S).
inline double down_and_out_call(double S, double K, double H, double sigma, double T) {
    return bs_call(S, K, sigma, T) - (S / H) * bs_call(H * H / S, K, sigma, T);
}

/// Price of phi(X_T) for X = x - sigma^2 t / 2 + sigma W killed on leaving (L, U),
/// by the method of images for the driftless density and a Girsanov weight.
/// `kinks` lists payoff breakpoints for the quadrature.
inline double killed_gbm_price(const std::function<double(double)>& phi, double x, double sigma, double T, double L,
                               double U, std::initializer_list<double> kinks = {}) {
    const double var = sigma * sigma * T;
    const double sd = std::sqrt(var);
    const double mu = -0.5 * sigma * sigma;
    auto g = [&](double z) { return std::exp(-z * z / (2.0 * var)) / std::sqrt(2.0 * M_PI * var); };
    const bool lower = std::isfinite(L), upper = std::isfinite(U);
    auto density = [&](double y) {
        double p = 0.0;
        if (lower && upper) {
            const double W = U - L;
            const int n_max = 2 + static_cast<int>(12.0 * sd / W);
            for (int n = -n_max; n <= n_max; ++n)
                p += g(y - x - 2.0 * n * W) - g(y - (2.0 * L - x) - 2.0 * n * W);
        } else if (lower) {
            p = g(y - x) - g(y - (2.0 * L - x));
        } else if (upper) {
            p = g(y - x) - g(y - (2.0 * U - x));
        } else {
            p = g(y - x);
        }
        return std::exp(mu / (sigma * sigma) * (y - x) - mu * mu * T / (2.0 * sigma * sigma)) * p;
    };
    const double a = lower ? L : x - 14.0 * sd;
    const double b = upper ? U : x + 14.0 * sd;
    std::vector<double> cuts{a};
    for (double k : kinks)
        if (k > a && k < b) cuts.push_back(k);
    cuts.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += gk([&](double y) { return phi(y) * density(y); }, cuts[i], cuts[i + 1]);
    return total;
}

/// CEV dS = sigma S^gamma dW with gamma < 1 and absorption at zero; call struck at K.
inline double cev_call(double S, double K, double sigma, double gamma, double T) {
    const double b = 1.0 - gamma;
    const double k = 1.0 / (2.0 * sigma * sigma * b * b * T);
    const double xx = k * std::pow(S, 2.0 * b);
    const double yy = k * std::pow(K, 2.0 * b);
    using boost::math::non_central_chi_squared;
    const double q1 = boost::math::cdf(boost::math::complement(non_central_chi_squared(2.0 + 1.0 / b, 2.0 * xx), 2.0 * yy));
    const double p2 = boost::math::cdf(non_central_chi_squared(1.0 / b, 2.0 * yy), 2.0 * xx);
    return S * q1 - K * p2;
}

struct HestonParams {
    double kappa, theta, delta, rho;
};

/// Characteristic function of X_T - x under Heston (numerically stable branch).
inline std::complex<double> heston_cf(std::complex<double> u, double v0, const HestonParams& h, double T) {
    using C = std::complex<double>;
    const C i(0.0, 1.0);
    const C beta = h.kappa - h.rho * h.delta * i * u;
    const C d = std::sqrt(beta * beta + h.delta * h.delta * (i * u + u * u));
    const C g = (beta - d) / (beta + d);
    const C e = std::exp(-d * T);
    const C Cc = h.kappa * h.theta / (h.delta * h.delta) * ((beta - d) * T - 2.0 * std::log((1.0 - g * e) / (1.0 - g)));
    const C D = (beta - d) / (h.delta * h.delta) * (1.0 - e) / (1.0 - g * e);
    return std::exp(Cc + D * v0);
}

/// Heston call on S = e^x struck at e^K, via the Lewis single-integral formula.
inline double heston_call(double x, double v0, double K, const HestonParams& h, double T) {
    const double S = std::exp(x), Kc = std::exp(K);
    const double k = x - K;
    auto f = [&](double u) {
        const std::complex<double> w(u, -0.5);
        return std::real(std::exp(std::complex<double>(0.0, u * k)) * heston_cf(w, v0, h, T)) / (u * u + 0.25);
    };
    double I = 0.0;
    for (double a = 0.0; a < 2000.0; a += 50.0) {
        const double piece = gk(f, a, a + 50.0, 1e-15);
        I += piece;
        if (a > 200.0 && std::fabs(piece) < 1e-18) break;
    }
    return S - std::sqrt(S * Kc) / M_PI * I;
}

inline double heston_put(double x, double v0, double K, const HestonParams& h, double T) {
    return heston_call(x, v0, K, h, T) - std::exp(x) + std::exp(K);
}

/// First-order Duhamel term for dX = -s2(X)/2 dt + sqrt(s2(X)) dW killed at a
/// single barrier B, with s2 linearised at xbar: s2 = s2_0 + ds2 (x - xbar).
///   u1 = ds2/2 int_0^T ds int p0(s, xbar, z) (z - xbar) (d_zz - d_z) u0(T - s, z) dz
/// where p0, u0 belong to the frozen coefficient s2_0. For s > T/2 the operator
/// is moved onto p0 by parts (boundary terms vanish since p0 = u0 = 0 at B), so
/// neither time end meets a singular integrand. `support` brackets phi.
inline double killed_first_order(const std::function<double(double)>& phi, std::initializer_list<double> kinks,
                                 double lo, double hi, double xbar, double s2_0, double ds2, double T, double B,
                                 bool upper, double tol = 1e-11) {
    using boost::math::differentiation::make_fvar;
    auto g = [](const std::function<double(double)>& f, double a, double b, double t) {
        return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 10, t);
    };
    // Killed density from z to w after time r; templated on z or w for autodiff.
    auto p0 = [&](double r, auto z, auto w) {
        using std::exp;
        const double v = s2_0 * r;
        const auto d1 = w - z, d2 = w - (2.0 * B - z);
        return exp(-d1 / 2.0 - s2_0 * r / 8.0) * (exp(-d1 * d1 / (2.0 * v)) - exp(-d2 * d2 / (2.0 * v))) /
               std::sqrt(2.0 * M_PI * v);
    };
    const double a = upper ? lo : std::max(B, lo), b = upper ? std::min(B, hi) : hi;
    std::vector<double> cuts{a};
    for (double k : kinks)
        if (k > a && k < b) cuts.push_back(k);
    cuts.push_back(b);
    auto payoff_integral = [&](const std::function<double(double)>& f) {
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) s += g(f, cuts[i], cuts[i + 1], tol);
        return s;
    };
    auto u0 = [&](double r, double z) { return payoff_integral([&](double w) { return phi(w) * p0(r, z, w); }); };
    auto Lu0 = [&](double r, double z) {
        return payoff_integral([&](double w) {
            const auto p = p0(r, make_fvar<double, 2>(z), w);
            return phi(w) * (p.derivative(2) - p.derivative(1));
        });
    };
    // Forward adjoint (d_ww + d_w) of p0(s, xbar, w) (w - xbar).
    auto adj = [&](double s, double w) {
        const auto ww = make_fvar<double, 2>(w);
        const auto h = p0(s, xbar, ww) * (ww - xbar);
        return h.derivative(2) + h.derivative(1);
    };
    auto window = [&](double s) {
        const double sd = std::sqrt(s2_0 * s);
        return std::pair{upper ? xbar - 12.0 * sd : std::max(B, xbar - 12.0 * sd),
                         upper ? std::min(B, xbar + 12.0 * sd) : xbar + 12.0 * sd};
    };
    auto early = [&](double s) {
        const auto [za, zb] = window(s);
        return g([&](double z) { return p0(s, xbar, z) * (z - xbar) * Lu0(T - s, z); }, za, zb, tol);
    };
    auto late = [&](double s) {
        const auto [za, zb] = window(T);
        return g([&](double z) { return adj(s, z) * u0(T - s, z); }, za, zb, tol);
    };
    return 0.5 * ds2 * (g(early, 0.0, T / 2.0, 1e-9) + g(late, T / 2.0, T, 1e-9));
}

}  // namespace oracle
