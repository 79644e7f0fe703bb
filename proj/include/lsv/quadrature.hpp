#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "lsv/error.hpp"

namespace lsv {

template <class T>
struct QuadResult {
    T value{};
    double error = 0.0;  // |last - previous| at acceptance
    int panels = 0;
};

/// Composite 20-point Gauss-Legendre rule on `panels` equal panels of [a, b].
template <class F>
auto gl_panels(F&& f, double a, double b, int panels) {
    using T = decltype(f(a));
    T sum{};
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        sum += boost::math::quadrature::gauss<double, 20>::integrate(f, lo, lo + h);
    }
    return sum;
}

/// Panel doubling until successive composite results differ by less than
/// tol * max(1, |value|). Throws ConvergenceError past max_panels.
template <class F>
auto integrate_panels(F&& f, double a, double b, double tol, int min_panels = 2,
                      int max_panels = 1 << 14) {
    using T = decltype(f(a));
    QuadResult<T> res;
    if (a == b) return res;
    int panels = min_panels;
    T prev = gl_panels(f, a, b, panels);
    while (true) {
        panels *= 2;
        T cur = gl_panels(f, a, b, panels);
        const double diff = std::abs(cur - prev);
        if (diff <= tol * std::max(1.0, std::abs(cur))) {
            res.value = cur;
            res.error = diff;
            res.panels = panels;
            return res;
        }
        if (panels >= max_panels)
            throw ConvergenceError("Gauss-Legendre panel doubling did not converge");
        prev = cur;
    }
}

/// Ridders-style Richardson extrapolation of central differences for the
/// derivative of order 0..3 of a smooth function.
template <class F>
auto numeric_derivative(F&& g, double x0, int order, double h0) {
    using T = decltype(g(x0));
    if (order == 0) return g(x0);
    if (order < 0 || order > 3) throw InvalidArgument("numeric derivative supports orders 0..3");
    auto stencil = [&](double h) -> T {
        switch (order) {
            case 1: return (g(x0 + h) - g(x0 - h)) / (2.0 * h);
            case 2: return (g(x0 + h) - 2.0 * g(x0) + g(x0 - h)) / (h * h);
            default:
                return (g(x0 + 2 * h) - 2.0 * g(x0 + h) + 2.0 * g(x0 - h) - g(x0 - 2 * h)) /
                       (2.0 * h * h * h);
        }
    };
    constexpr int kLevels = 6;
    T tab[kLevels][kLevels];
    double h = h0;
    T best = stencil(h);
    double best_err = std::numeric_limits<double>::infinity();
    tab[0][0] = best;
    for (int i = 1; i < kLevels; ++i) {
        h /= 2.0;
        tab[i][0] = stencil(h);
        double fac = 4.0;
        for (int j = 1; j <= i; ++j) {
            tab[i][j] = (fac * tab[i][j - 1] - tab[i - 1][j - 1]) / (fac - 1.0);
            fac *= 4.0;
            const double err = std::max(std::abs(tab[i][j] - tab[i][j - 1]),
                                        std::abs(tab[i][j] - tab[i - 1][j - 1]));
            if (err < best_err) {
                best_err = err;
                best = tab[i][j];
            }
        }
        if (std::abs(tab[i][i] - tab[i - 1][i - 1]) > 2.0 * best_err && i > 2) break;
    }
    return best;
}

/// Hadamard finite part of int_a^b g(x) (x - x0)^(-m-1) dx for a < x0 < b.
/// The symmetric window around x0 is folded, so only derivatives of g of
/// order < m are required; m = 0 gives the Cauchy principal value.
template <class F>
auto hadamard_finite_part(F&& g, double x0, int m, double a, double b, double tol = 1e-10) {
    using T = decltype(g(x0));
    if (!(a < x0 && x0 < b)) throw InvalidArgument("finite part requires a < x0 < b");
    if (m < 0 || m > 4) throw InvalidArgument("finite part supports singularity orders 1..5");
    const double h = std::min(x0 - a, b - x0);
    const double sign = (m % 2 == 0) ? -1.0 : 1.0;  // (-1)^(m+1)
    // Surviving Taylor terms of the folded integrand: p < m with p = m + 1 (mod 2).
    std::vector<std::pair<int, T>> taylor;
    for (int p = (m + 1) % 2; p < m; p += 2) {
        T d = numeric_derivative(g, x0, p, 0.25 * h);
        double fact = 1.0;
        for (int q = 2; q <= p; ++q) fact *= q;
        taylor.emplace_back(p, 2.0 * d / fact);
    }
    auto folded = [&](double u) -> T {
        T s = g(x0 + u) + sign * g(x0 - u);
        for (const auto& [p, c] : taylor) s -= c * std::pow(u, p);
        return s / std::pow(u, m + 1);
    };
    T value = integrate_panels(folded, 0.0, h, tol).value;
    for (const auto& [p, c] : taylor) value += c * std::pow(h, p - m) / static_cast<double>(p - m);
    auto regular = [&](double x) -> T { return g(x) / std::pow(x - x0, m + 1); };
    if (x0 - h > a) value += integrate_panels(regular, a, x0 - h, tol).value;
    if (x0 + h < b) value += integrate_panels(regular, x0 + h, b, tol).value;
    return value;
}

}  // namespace lsv
