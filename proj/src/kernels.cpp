#include "lsv/kernels.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include "lsv/error.hpp"

namespace lsv {

namespace {

constexpr double kPi = std::numbers::pi;

double binomial(int n, int k) {
    double b = 1.0;
    for (int q = 1; q <= k; ++q) b = b * (n - k + q) / q;
    return b;
}

double factorial(int n) {
    double f = 1.0;
    for (int q = 2; q <= n; ++q) f *= q;
    return f;
}

std::atomic<double> g_c_perturbation{0.0};

}  // namespace

cplx FourierBasis::eigenfunction(cplx w, double z) const {
    return std::exp(cplx(0.0, 1.0) * w * z) / std::sqrt(2.0 * kPi);
}

double HalfLineBasis::eigenfunction(double w, double z) const {
    if (z < L) throw InvalidArgument("point below the half-line barrier");
    return std::sqrt(2.0 / kPi) * std::exp(-beta() * z) * std::sin(w * (z - L));
}

double HalfLineBasis::weight(double z) const { return std::exp(x.b / x.a * z); }

double IntervalBasis::frequency(int l) const noexcept { return kPi * l / width(); }

double IntervalBasis::eigenvalue(int l) const {
    const double f = frequency(l);
    return -x.b * x.b / (4.0 * x.a) - x.a * f * f;
}

double IntervalBasis::eigenfunction(int l, double z) const {
    if (z < L || z > U) throw InvalidArgument("point outside the barrier interval");
    return std::sqrt(2.0 / width()) * std::exp(-beta() * z) * std::sin(frequency(l) * (z - L));
}

double IntervalBasis::weight(double z) const { return std::exp(x.b / x.a * z); }

void validate(const KernelBasis& basis) {
    std::visit(
        [](const auto& b) {
            if (!(b.x.a > 0.0)) throw InvalidArgument("frozen diffusion coefficient must be positive");
            if constexpr (std::is_same_v<std::decay_t<decltype(b)>, IntervalBasis>)
                if (!(b.L < b.U)) throw InvalidArgument("interval basis requires L < U");
        },
        basis);
}

TrigDerivCoeffs deriv_coeffs(double beta, double w, int k) {
    if (k < 0) throw InvalidArgument("negative derivative order");
    // Binomial sums of (-beta + i w)^k, kept real to avoid complex pow rounding.
    double c_even = 0.0, c_odd = 0.0;
    for (int q = 0; q <= k; ++q) {
        const double mag = binomial(k, q) * std::pow(-beta, k - q) * std::pow(w, q);
        switch (q % 4) {
            case 0: c_even += mag; break;
            case 1: c_odd += mag; break;
            case 2: c_even -= mag; break;
            default: c_odd -= mag; break;
        }
    }
    return {c_odd, c_even, 1.0};
}

TrigDerivCoeffs deriv_coeffs(const IntervalBasis& basis, int l, int k) {
    auto c = deriv_coeffs(basis.beta(), basis.frequency(l), k);
    c.normalization = std::sqrt(2.0 / basis.width());
    return c;
}

TrigDerivCoeffs deriv_coeffs(const HalfLineBasis& basis, double w, int k) {
    auto c = deriv_coeffs(basis.beta(), w, k);
    c.normalization = std::sqrt(2.0 / kPi);
    return c;
}

// ---------------------------------------------------------------------------

TrigMoments::TrigMoments(int max_m, int max_p) : max_m_(max_m), max_p_(max_p) {
    if (max_m < 0 || max_p < 0) throw InvalidArgument("trig moment table bounds must be non-negative");
    const std::size_t rows = static_cast<std::size_t>(max_m) + 1, cols = static_cast<std::size_t>(max_p) + 1;
    ic_.assign(rows * cols, 0.0);
    is_.assign(rows * cols, 0.0);
    for (int p = 0; p <= max_p; ++p) {
        for (int m = 0; m <= max_m; ++m) {
            const std::size_t at = static_cast<std::size_t>(m) * cols + static_cast<std::size_t>(p);
            if (p == 0) {
                ic_[at] = std::pow(kPi, m + 1) / (m + 1);
                is_[at] = 0.0;
                continue;
            }
            const double sgn = (p % 2 == 0) ? 1.0 : -1.0;  // cos(p pi)
            const std::size_t prev = at - cols;
            // Integration by parts; the x = 0 boundary term only survives for m = 0.
            if (m == 0) {
                is_[at] = (1.0 - sgn) / p;
                ic_[at] = 0.0;
            } else {
                is_[at] = -std::pow(kPi, m) * sgn / p + (static_cast<double>(m) / p) * ic_[prev];
                ic_[at] = -(static_cast<double>(m) / p) * is_[prev];
            }
        }
    }
}

double TrigMoments::cos_moment(int m, int p) const {
    if (m < 0 || m > max_m_ || std::abs(p) > max_p_) throw InvalidArgument("trig moment outside table");
    return ic_[static_cast<std::size_t>(m) * (max_p_ + 1) + static_cast<std::size_t>(std::abs(p))];
}

double TrigMoments::sin_moment(int m, int p) const {
    if (m < 0 || m > max_m_ || std::abs(p) > max_p_) throw InvalidArgument("trig moment outside table");
    const double v = is_[static_cast<std::size_t>(m) * (max_p_ + 1) + static_cast<std::size_t>(std::abs(p))];
    return p < 0 ? -v : v;
}

double TrigMoments::value(int m, int l_prime, int l, TrigKind kind) const {
    if (kind == TrigKind::sin_sin)
        return 0.5 * (cos_moment(m, l_prime - l) - cos_moment(m, l_prime + l));
    return 0.5 * (sin_moment(m, l_prime + l) + sin_moment(m, l_prime - l));
}

double trig_moment(int m, int l_prime, int l, TrigKind kind) {
    if (m < 0) throw InvalidArgument("negative moment power");
    TrigMoments t(m, std::abs(l_prime) + std::abs(l));
    return t.value(m, l_prime, l, kind);
}

// ---------------------------------------------------------------------------

void set_interval_C_perturbation(double relative) { g_c_perturbation.store(relative); }
double interval_C_perturbation() { return g_c_perturbation.load(); }

namespace {

double interval_C_with(const IntervalBasis& basis, const TrigMoments& tm, int l_prime, int l, int i, int k,
                       double center) {
    const auto c = deriv_coeffs(basis.beta(), basis.frequency(l), k);
    const double w = basis.width();
    const double shift = basis.L - center;
    double sum = 0.0;
    double scale = w / kPi;  // (w/pi)^(m+1)
    for (int m = 0; m <= i; ++m) {
        const double inner = c.c_odd * tm.value(m, l_prime, l, TrigKind::sin_cos) +
                             c.c_even * tm.value(m, l_prime, l, TrigKind::sin_sin);
        sum += binomial(i, m) * std::pow(shift, i - m) * scale * inner;
        scale *= w / kPi;
    }
    // Both eigenfunctions carry sqrt(2/w).
    return (2.0 / w) * sum * (1.0 + g_c_perturbation.load(std::memory_order_relaxed));
}

}  // namespace

double interval_C(const IntervalBasis& basis, int l_prime, int l, int i, int k, double center) {
    if (l_prime < 1 || l < 1) throw InvalidArgument("interval modes start at 1");
    if (i < 0 || k < 0) throw InvalidArgument("negative monomial order");
    validate(basis);
    TrigMoments tm(i, l_prime + l);
    return interval_C_with(basis, tm, l_prime, l, i, k, center);
}

IntervalCTable::IntervalCTable(const IntervalBasis& basis, int i, int k, double center, int modes)
    : modes_(modes) {
    if (modes < 1) throw InvalidArgument("interval table needs at least one mode");
    validate(basis);
    TrigMoments tm(i, 2 * modes);
    data_.resize(static_cast<std::size_t>(modes) * static_cast<std::size_t>(modes));
    for (int lp = 1; lp <= modes; ++lp)
        for (int l = 1; l <= modes; ++l)
            data_[static_cast<std::size_t>(lp - 1) * modes + static_cast<std::size_t>(l - 1)] =
                interval_C_with(basis, tm, lp, l, i, k, center);
}

// ---------------------------------------------------------------------------

HalfLineCoupling halfline_coupling(const HalfLineBasis& basis, double w_prime, double w, int i, int k,
                                   double center) {
    if (!(w > 0.0) || !(w_prime > 0.0)) throw InvalidArgument("half-line frequencies must be positive");
    if (i < 0 || k < 0) throw InvalidArgument("negative monomial order");
    const auto c = deriv_coeffs(basis.beta(), w, k);
    HalfLineCoupling out;
    out.fp.assign(static_cast<std::size_t>(i) + 1, 0.0);
    out.delta.assign(static_cast<std::size_t>(i) + 1, 0.0);
    const double shift = basis.L - center;
    for (int m = 0; m <= i; ++m) {
        const double wm = binomial(i, m) * std::pow(shift, i - m);
        // sin(m pi/2), cos(m pi/2) exactly.
        const double s = (m % 2 == 0) ? 0.0 : (m % 4 == 1 ? 1.0 : -1.0);
        const double co = (m % 2 == 1) ? 0.0 : (m % 4 == 0 ? 1.0 : -1.0);
        const double mf = factorial(m) / kPi;
        out.fp[static_cast<std::size_t>(m)] = wm * mf * (-s * c.c_even + co * c.c_odd);
        out.delta[static_cast<std::size_t>(m)] = wm * (co * c.c_even - s * c.c_odd);
        out.regular += wm * mf * (s * c.c_even + co * c.c_odd) * std::pow(w_prime + w, -m - 1);
    }
    return out;
}

double halfline_C(const HalfLineBasis& basis, double w_prime, double w, int i, int k, double center) {
    if (w_prime == w) throw InvalidArgument("half-line coupling is singular at w' = w; use the finite-part integrator");
    const auto c = halfline_coupling(basis, w_prime, w, i, k, center);
    double v = c.regular;
    for (std::size_t m = 0; m < c.fp.size(); ++m)
        v += c.fp[m] * std::pow(w_prime - w, -static_cast<int>(m) - 1);
    return v;
}

// ---------------------------------------------------------------------------

cplx fourier_transform(const Payoff& phi, cplx w, double xbar) {
    const auto [lo, hi] = phi.fourier_strip();
    if (!(w.imag() > lo && w.imag() < hi))
        throw DivergentTransform("Fourier contour lies outside the payoff's analyticity strip");
    const cplx z(w.imag(), -w.real());  // -i w
    const double inf = std::numeric_limits<double>::infinity();
    return std::exp(-z * xbar) * payoff_exp_integral(phi, z, -inf, inf) / std::sqrt(2.0 * kPi);
}

double interval_transform(const IntervalBasis& basis, const Payoff& phi, int l) {
    if (l < 1) throw InvalidArgument("interval modes start at 1");
    const double f = basis.frequency(l);
    const cplx z(basis.beta(), f);
    const cplx v = std::exp(cplx(0.0, -f * basis.L)) * payoff_exp_integral(phi, z, basis.L, basis.U);
    return std::sqrt(2.0 / basis.width()) * v.imag();
}

void check_halfline_transform(const HalfLineBasis& basis, const Payoff& phi) {
    const double beta = basis.beta();
    for (const auto& p : phi.pieces()) {
        if (p.hi != std::numeric_limits<double>::infinity()) continue;
        if ((p.c0 != 0.0 || p.c1 != 0.0) && !(beta < 0.0))
            throw DivergentTransform("half-line transform diverges; use the far-barrier interval route");
        if (p.ce != 0.0 && !(beta + 1.0 < 0.0))
            throw DivergentTransform(
                "half-line transform of an exponentially growing payoff diverges; use the far-barrier interval route");
    }
}

double halfline_transform(const HalfLineBasis& basis, const Payoff& phi, double w) {
    check_halfline_transform(basis, phi);
    const cplx z(basis.beta(), w);
    const double inf = std::numeric_limits<double>::infinity();
    const cplx v = std::exp(cplx(0.0, -w * basis.L)) * payoff_exp_integral(phi, z, basis.L, inf);
    return std::sqrt(2.0 / kPi) * v.imag();
}

}  // namespace lsv
