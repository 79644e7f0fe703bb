#pragma once

// Kernel bodies written once over a lane type V. The scalar reference uses
// V = double; the AVX2 translation unit supplies a four-lane type with the same
// primitives, so both instantiations perform identical IEEE operations.
// Branches are evaluated and blended; a branch may be skipped only when no
// lane selects it.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>

#include "lsv/simd.hpp"

namespace lsv::simd::detail {

// ---- scalar primitives -------------------------------------------------------

inline double select(bool m, double a, double b) { return m ? a : b; }
inline double vmin(double a, double b) { return a < b ? a : b; }
inline double vmax(double a, double b) { return a > b ? a : b; }
inline double vabs(double a) { return std::fabs(a); }
inline double vsqrt(double a) { return std::sqrt(a); }
inline double round_nearest(double a) { return std::nearbyint(a); }
inline bool all_of(bool m) { return m; }
inline bool any_of(bool m) { return m; }
template <class V>
inline V load(const double* p) {
    return *p;
}
inline void store(double* p, double v) { *p = v; }

/// 2^k for integral k in [-1022, 1023].
inline double pow2i(double k) {
    return std::bit_cast<double>(static_cast<std::uint64_t>(static_cast<std::int64_t>(k) + 1023) << 52);
}

/// x = 2^e * m with m in [1, 2); x positive and normal.
inline double exponent_split(double x, double& m) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    m = std::bit_cast<double>((bits & 0x000fffffffffffffULL) | 0x3ff0000000000000ULL);
    return static_cast<double>(static_cast<std::int64_t>(bits >> 52)) - 1023.0;
}

template <class V>
inline constexpr std::size_t lanes = 1;

// ---- elementary functions (fdlibm algorithms) --------------------------------

template <class V>
V exp_t(V x) {
    constexpr double invln2 = 1.44269504088896338700e+00;
    constexpr double ln2hi = 6.93147180369123816490e-01;
    constexpr double ln2lo = 1.90821492927058770002e-10;
    constexpr double P1 = 1.66666666666666019037e-01;
    constexpr double P2 = -2.77777777770155933842e-03;
    constexpr double P3 = 6.61375632143793436117e-05;
    constexpr double P4 = -1.65339022054652515390e-06;
    constexpr double P5 = 4.13813679705723846039e-08;
    x = vmin(vmax(x, V(-700.0)), V(700.0));
    const V k = round_nearest(x * V(invln2));
    const V hi = x - k * V(ln2hi);
    const V lo = k * V(ln2lo);
    const V r = hi - lo;
    const V t = r * r;
    const V c = r - t * (V(P1) + t * (V(P2) + t * (V(P3) + t * (V(P4) + t * V(P5)))));
    const V y = V(1.0) - ((lo - (r * c) / (V(2.0) - c)) - hi);
    return y * pow2i(k);
}

template <class V>
V log_t(V x) {
    constexpr double ln2hi = 6.93147180369123816490e-01;
    constexpr double ln2lo = 1.90821492927058770002e-10;
    constexpr double Lg1 = 6.666666666666735130e-01;
    constexpr double Lg2 = 3.999999999940941908e-01;
    constexpr double Lg3 = 2.857142874366239149e-01;
    constexpr double Lg4 = 2.222219843214978396e-01;
    constexpr double Lg5 = 1.818357216161805012e-01;
    constexpr double Lg6 = 1.531383769920937332e-01;
    constexpr double Lg7 = 1.479819860511658591e-01;
    V m(0.0);
    V k = exponent_split(x, m);
    const auto big = m > V(1.41421356237309504880);
    m = select(big, m * V(0.5), m);
    k = select(big, k + V(1.0), k);
    const V f = m - V(1.0);
    const V s = f / (V(2.0) + f);
    const V z = s * s;
    const V w = z * z;
    const V t1 = w * (V(Lg2) + w * (V(Lg4) + w * V(Lg6)));
    const V t2 = z * (V(Lg1) + w * (V(Lg3) + w * (V(Lg5) + w * V(Lg7))));
    const V R = t2 + t1;
    const V hfsq = V(0.5) * f * f;
    return k * V(ln2hi) - ((hfsq - (s * (hfsq + R) + k * V(ln2lo))) - f);
}

template <class V>
V horner8(V r, const double (&c)[8]) {
    V acc(c[7]);
    for (int i = 6; i >= 0; --i) acc = acc * r + V(c[i]);
    return acc;
}

template <class V>
V inverse_normal_t(V p) {
    static constexpr double a[8] = {3.3871328727963666080e0, 1.3314166789178437745e+2, 1.9715909503065514427e+3,
                                    1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                    3.3430575583588128105e+4, 2.5090809287301226727e+3};
    static constexpr double b[8] = {1.0,
                                    4.2313330701600911252e+1,
                                    6.8718700749205790830e+2,
                                    5.3941960214247511077e+3,
                                    2.1213794301586595867e+4,
                                    3.9307895800092710610e+4,
                                    2.8729085735721942674e+4,
                                    5.2264952788528545610e+3};
    static constexpr double c[8] = {1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
                                    3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
                                    2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[8] = {1.0,
                                    2.05319162663775882187e0,
                                    1.67638483018380384940e0,
                                    6.89767334985100004550e-1,
                                    1.48103976427480074590e-1,
                                    1.51986665636164571966e-2,
                                    5.47593808499534494600e-4,
                                    1.05075007164441684324e-9};
    static constexpr double e[8] = {6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
                                    2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                    2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[8] = {1.0,
                                    5.99832206555887937690e-1,
                                    1.36929880922735805310e-1,
                                    1.48753612908506148525e-2,
                                    7.86869131145613259100e-4,
                                    1.84631831751005468180e-5,
                                    1.42151175831644588870e-7,
                                    2.04426310338993978564e-15};
    // One division per lane: numerator and denominator are blended first. Tail
    // branches are skipped when no lane needs them, which leaves results unchanged.
    const V q = p - V(0.5);
    const auto central = vabs(q) <= V(0.425);
    const V rc = V(0.180625) - q * q;
    V num = q * horner8(rc, a);
    V den = horner8(rc, b);
    if (!all_of(central)) {
        const auto neg = q < V(0.0);
        V r = select(neg, p, V(1.0) - p);
        r = vsqrt(-log_t(r));
        const auto far = r > V(5.0);
        const V r1 = r - V(1.6);
        V tn = horner8(r1, c);
        V td = horner8(r1, d);
        if (any_of(far)) {
            const V r2 = r - V(5.0);
            tn = select(far, horner8(r2, e), tn);
            td = select(far, horner8(r2, f), td);
        }
        tn = select(neg, -tn, tn);
        num = select(central, num, tn);
        den = select(central, den, td);
    }
    return num / den;
}

// ---- path kernels -------------------------------------------------------------

template <class V>
void heston_t(const HestonStep& p, std::size_t n, double* x, double* v, const double* z0, const double* z1,
              double* s2) {
    for (std::size_t i = 0; i < n; i += lanes<V>) {
        const V vp = vmax(load<V>(v + i), V(0.0));
        const V sd = vsqrt(vp * V(p.dt));
        const V w0 = load<V>(z0 + i);
        const V w1 = load<V>(z1 + i);
        store(x + i, load<V>(x + i) - V(p.half_dt) * vp + sd * w0);
        store(v + i, load<V>(v + i) + V(p.kappa_dt) * (V(p.theta) - vp) +
                         V(p.delta) * sd * (V(p.rho) * w0 + V(p.rho_bar) * w1));
        store(s2 + i, vp);
    }
}

template <class V>
void cev_t(const CevStep& p, std::size_t n, double* x, const double* z, double* s2) {
    for (std::size_t i = 0; i < n; i += lanes<V>) {
        const V xi = load<V>(x + i);
        const V s = V(p.sigma) * exp_t(V(p.gamma_minus_one) * xi);
        const V ss = s * s;
        store(x + i, xi - V(p.half_dt) * ss + s * V(p.sqrt_dt) * load<V>(z + i));
        store(s2 + i, ss);
    }
}

template <class V>
void gbm_t(const GbmStep& p, std::size_t n, double* x, const double* z, double* s2) {
    for (std::size_t i = 0; i < n; i += lanes<V>) {
        store(x + i, load<V>(x + i) + V(p.drift) + V(p.vol) * load<V>(z + i));
        store(s2 + i, V(p.s2));
    }
}

template <class V>
void bounds_t(int steps, std::size_t n, std::size_t stride, const double* X, const double* S2, double* lo,
              double* hi, double* s2max) {
    for (std::size_t i = 0; i < n; i += lanes<V>) {
        V l = load<V>(X + i), h = l, m(0.0);
        for (int s = 0; s < steps; ++s) {
            const V xs = load<V>(X + (s + 1) * stride + i);
            l = vmin(l, xs);
            h = vmax(h, xs);
            m = vmax(m, load<V>(S2 + s * stride + i));
        }
        store(lo + i, l);
        store(hi + i, h);
        store(s2max + i, m);
    }
}

// Per-step factors are exactly 1 once the bridge exponent exceeds this.
inline constexpr double kBridgeCut = 40.0;
// A whole path is skipped when its worst-case exponent clears the cut with
// margin for rounding, which makes the skip exact.
inline constexpr double kSkipCut = 41.0;

template <class V>
void survival_t(const BridgeArgs& a, std::size_t n, std::size_t stride, const double* X, const double* S2,
                const double* lo, const double* hi, const double* s2max, double* weight) {
    const V L(a.L), U(a.U), two_over_dt(2.0 / a.dt);
    for (std::size_t i = 0; i < n; i += lanes<V>) {
        const V gap = vmin(load<V>(lo + i) - L, U - load<V>(hi + i));
        const V worst = two_over_dt * gap * gap / load<V>(s2max + i);
        const auto clear = gap > V(0.0);
        const auto skip = a.bridge ? (clear & (worst > V(kSkipCut))) : clear;
        if (all_of(skip)) {
            store(weight + i, V(1.0));
            continue;
        }
        V w(1.0);
        V x0 = load<V>(X + i);
        for (int s = 0; s < a.steps; ++s) {
            const V x1 = load<V>(X + (s + 1) * stride + i);
            const auto inside = (x1 > L) & (x1 < U);
            V factor(1.0);
            if (a.bridge) {
                const V mid = V(0.5) * (x0 + x1);
                const V B = select((mid - L) < (U - mid), L, U);
                const V arg = two_over_dt * ((x0 - B) * (x1 - B)) / load<V>(S2 + s * stride + i);
                const auto quiet = arg > V(kBridgeCut);
                if (!all_of(quiet)) factor = select(quiet, V(1.0), V(1.0) - exp_t(-vmin(arg, V(kBridgeCut))));
            }
            w = w * select(inside, factor, V(0.0));
            x0 = x1;
        }
        store(weight + i, w);
    }
}

}  // namespace lsv::simd::detail
