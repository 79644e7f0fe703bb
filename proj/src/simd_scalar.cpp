#include "simd_math.hpp"

namespace lsv::simd {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;

void normals_scalar(const NormalDraw& d, std::size_t n, double* z0, double* z1) {
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(d.seed),
                                              static_cast<std::uint32_t>(d.seed >> 32)};
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t path = d.first_path + i;
        const auto w = philox4x32({static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), d.step,
                                   d.stream},
                                  key);
        const std::uint64_t a = w[0] | (std::uint64_t{w[1]} << 32);
        const std::uint64_t b = w[2] | (std::uint64_t{w[3]} << 32);
        constexpr double scale = 0x1p-52;
        z0[i] = detail::inverse_normal_t((static_cast<double>(a >> 12) + 0.5) * scale);
        if (z1) z1[i] = detail::inverse_normal_t((static_cast<double>(b >> 12) + 0.5) * scale);
    }
}

const Kernels kScalar = {
    normals_scalar,
    detail::heston_t<double>,
    detail::cev_t<double>,
    detail::gbm_t<double>,
    detail::bounds_t<double>,
    detail::survival_t<double>,
};

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kW0;
            k[1] += kW1;
        }
        const std::uint64_t p0 = std::uint64_t{kM0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kM1} * c[2];
        c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    }
    return c;
}

double exp_ref(double x) { return detail::exp_t(x); }
double log_ref(double x) { return detail::log_t(x); }
double inverse_normal(double p) { return detail::inverse_normal_t(p); }

const Kernels& scalar_kernels() { return kScalar; }

}  // namespace lsv::simd
