// Compiled with -mavx2; only reached after a run-time CPU check.
#include <immintrin.h>

#include "simd_math.hpp"

namespace lsv::simd::detail {

struct D4 {
    __m256d v;
    D4() = default;
    D4(double a) : v(_mm256_set1_pd(a)) {}
    D4(__m256d a) : v(a) {}
};

struct M4 {
    __m256d m;
};

template <>
inline constexpr std::size_t lanes<D4> = 4;

inline D4 operator+(D4 a, D4 b) { return _mm256_add_pd(a.v, b.v); }
inline D4 operator-(D4 a, D4 b) { return _mm256_sub_pd(a.v, b.v); }
inline D4 operator*(D4 a, D4 b) { return _mm256_mul_pd(a.v, b.v); }
inline D4 operator/(D4 a, D4 b) { return _mm256_div_pd(a.v, b.v); }
inline D4 operator-(D4 a) { return _mm256_xor_pd(a.v, _mm256_set1_pd(-0.0)); }
inline M4 operator<(D4 a, D4 b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_LT_OQ)}; }
inline M4 operator<=(D4 a, D4 b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_LE_OQ)}; }
inline M4 operator>(D4 a, D4 b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_GT_OQ)}; }
inline M4 operator&(M4 a, M4 b) { return {_mm256_and_pd(a.m, b.m)}; }

inline D4 select(M4 m, D4 a, D4 b) { return _mm256_blendv_pd(b.v, a.v, m.m); }
// max/min_pd return the second operand unless the first compares greater/less,
// matching the scalar ternaries including NaN and signed zeros.
inline D4 vmin(D4 a, D4 b) { return _mm256_min_pd(a.v, b.v); }
inline D4 vmax(D4 a, D4 b) { return _mm256_max_pd(a.v, b.v); }
inline D4 vabs(D4 a) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), a.v); }
inline D4 vsqrt(D4 a) { return _mm256_sqrt_pd(a.v); }
inline D4 round_nearest(D4 a) { return _mm256_round_pd(a.v, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC); }
inline bool all_of(M4 m) { return _mm256_movemask_pd(m.m) == 0xF; }
inline bool any_of(M4 m) { return _mm256_movemask_pd(m.m) != 0; }
template <>
inline D4 load<D4>(const double* p) { return _mm256_loadu_pd(p); }
inline void store(double* p, D4 v) { _mm256_storeu_pd(p, v.v); }

inline D4 pow2i(D4 k) {
    const __m256d magic = _mm256_set1_pd(0x1.8p52);
    const __m256i ki = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k.v, magic)), _mm256_castpd_si256(magic));
    return _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52));
}

inline D4 exponent_split(D4 x, D4& m) {
    const __m256i bits = _mm256_castpd_si256(x.v);
    m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL)),
                                            _mm256_set1_epi64x(0x3ff0000000000000LL)));
    const __m256i e = _mm256_srli_epi64(bits, 52);
    const __m256d ed =
        _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(e, _mm256_set1_epi64x(0x4330000000000000LL))),
                      _mm256_set1_pd(0x1p52));
    return _mm256_sub_pd(ed, _mm256_set1_pd(1023.0));
}

}  // namespace lsv::simd::detail

namespace lsv::simd {

namespace {

using detail::D4;

// Philox lanes hold one 32-bit word per 64-bit slot so _mm256_mul_epu32 yields
// the full product.
inline void mulhilo(__m256i a, std::uint32_t m, __m256i& hi, __m256i& lo) {
    const __m256i p = _mm256_mul_epu32(a, _mm256_set1_epi64x(m));
    hi = _mm256_srli_epi64(p, 32);
    lo = _mm256_and_si256(p, _mm256_set1_epi64x(0xffffffffLL));
}

inline D4 to_uniform(__m256i lo, __m256i hi) {
    const __m256i w = _mm256_or_si256(lo, _mm256_slli_epi64(hi, 32));
    const __m256i top = _mm256_or_si256(_mm256_srli_epi64(w, 12), _mm256_set1_epi64x(0x4330000000000000LL));
    const D4 k = _mm256_sub_pd(_mm256_castsi256_pd(top), _mm256_set1_pd(0x1p52));
    return (k + D4(0.5)) * D4(0x1p-52);
}

void normals_avx2(const NormalDraw& d, std::size_t n, double* z0, double* z1) {
    const std::size_t n4 = n & ~std::size_t{3};
    for (std::size_t i = 0; i < n4; i += 4) {
        const std::uint64_t p = d.first_path + i;
        __m256i c0 = _mm256_set_epi64x(static_cast<std::uint32_t>(p + 3), static_cast<std::uint32_t>(p + 2),
                                       static_cast<std::uint32_t>(p + 1), static_cast<std::uint32_t>(p));
        __m256i c1 = _mm256_set_epi64x((p + 3) >> 32, (p + 2) >> 32, (p + 1) >> 32, p >> 32);
        __m256i c2 = _mm256_set1_epi64x(d.step);
        __m256i c3 = _mm256_set1_epi64x(d.stream);
        std::uint32_t k0 = static_cast<std::uint32_t>(d.seed), k1 = static_cast<std::uint32_t>(d.seed >> 32);
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k0 += 0x9E3779B9u;
                k1 += 0xBB67AE85u;
            }
            __m256i hi0, lo0, hi1, lo1;
            mulhilo(c0, 0xD2511F53u, hi0, lo0);
            mulhilo(c2, 0xCD9E8D57u, hi1, lo1);
            const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), _mm256_set1_epi64x(k0));
            const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), _mm256_set1_epi64x(k1));
            c0 = n0;
            c1 = lo1;
            c2 = n2;
            c3 = lo0;
        }
        detail::store(z0 + i, detail::inverse_normal_t(to_uniform(c0, c1)));
        if (z1) detail::store(z1 + i, detail::inverse_normal_t(to_uniform(c2, c3)));
    }
    if (n4 < n) {
        NormalDraw rest = d;
        rest.first_path += n4;
        scalar_kernels().normals(rest, n - n4, z0 + n4, z1 ? z1 + n4 : nullptr);
    }
}

// Vector body over whole groups of four, scalar reference for the tail.
void heston_avx2(const HestonStep& p, std::size_t n, double* x, double* v, const double* z0, const double* z1,
                 double* s2) {
    const std::size_t n4 = n & ~std::size_t{3};
    detail::heston_t<D4>(p, n4, x, v, z0, z1, s2);
    if (n4 < n) scalar_kernels().heston(p, n - n4, x + n4, v + n4, z0 + n4, z1 + n4, s2 + n4);
}

void cev_avx2(const CevStep& p, std::size_t n, double* x, const double* z, double* s2) {
    const std::size_t n4 = n & ~std::size_t{3};
    detail::cev_t<D4>(p, n4, x, z, s2);
    if (n4 < n) scalar_kernels().cev(p, n - n4, x + n4, z + n4, s2 + n4);
}

void gbm_avx2(const GbmStep& p, std::size_t n, double* x, const double* z, double* s2) {
    const std::size_t n4 = n & ~std::size_t{3};
    detail::gbm_t<D4>(p, n4, x, z, s2);
    if (n4 < n) scalar_kernels().gbm(p, n - n4, x + n4, z + n4, s2 + n4);
}

void bounds_avx2(int steps, std::size_t n, std::size_t stride, const double* X, const double* S2, double* lo,
                 double* hi, double* s2max) {
    const std::size_t n4 = n & ~std::size_t{3};
    detail::bounds_t<D4>(steps, n4, stride, X, S2, lo, hi, s2max);
    if (n4 < n) scalar_kernels().bounds(steps, n - n4, stride, X + n4, S2 + n4, lo + n4, hi + n4, s2max + n4);
}

void survival_avx2(const BridgeArgs& a, std::size_t n, std::size_t stride, const double* X, const double* S2,
                   const double* lo, const double* hi, const double* s2max, double* weight) {
    const std::size_t n4 = n & ~std::size_t{3};
    detail::survival_t<D4>(a, n4, stride, X, S2, lo, hi, s2max, weight);
    if (n4 < n)
        scalar_kernels().survival(a, n - n4, stride, X + n4, S2 + n4, lo + n4, hi + n4, s2max + n4, weight + n4);
}

const Kernels kAvx2 = {normals_avx2, heston_avx2, cev_avx2, gbm_avx2, bounds_avx2, survival_avx2};

}  // namespace

const Kernels* avx2_kernels() { return &kAvx2; }

}  // namespace lsv::simd
