#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

// Monte Carlo inner loops. Every kernel exists as a scalar reference and as an
// AVX2 variant selected at run time; both evaluate the same operation sequence,
// so their outputs agree bit for bit.

namespace lsv::simd {

enum class Isa { scalar, avx2 };
std::string to_string(Isa isa);

/// Philox4x32-10 block.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/// Reference elementary functions shared by all kernels.
double exp_ref(double x);  // |x| <= 700
double log_ref(double x);  // normal positive x
/// Wichura's AS241 inverse normal CDF for p in (0, 1).
double inverse_normal(double p);

/// Counter layout (path_lo, path_hi, step, stream), key = seed.
struct NormalDraw {
    std::uint64_t seed = 0;
    std::uint64_t first_path = 0;
    std::uint32_t step = 0;
    std::uint32_t stream = 0;
};

struct HestonStep {
    double kappa_dt, theta, delta, rho, rho_bar, dt, half_dt;
};

struct CevStep {
    double sigma, gamma_minus_one, half_dt, sqrt_dt;
};

struct GbmStep {
    double drift, vol, s2;
};

/// Knock-out window and step for the survival weights; infinite ends allowed.
struct BridgeArgs {
    double L, U, dt;
    int steps;
    bool bridge;
};

/// Paths are stored step-major: X[s * stride + p] for s = 0..steps, S2[s * stride + p]
/// for s = 0..steps-1 (the squared diffusion at the left end of step s).
struct Kernels {
    /// z0 from words 0-1, z1 (optional) from words 2-3 of one Philox block per path.
    void (*normals)(const NormalDraw& d, std::size_t n, double* z0, double* z1);
    void (*heston)(const HestonStep& p, std::size_t n, double* x, double* v, const double* z0, const double* z1,
                   double* s2);
    void (*cev)(const CevStep& p, std::size_t n, double* x, const double* z, double* s2);
    void (*gbm)(const GbmStep& p, std::size_t n, double* x, const double* z, double* s2);
    /// Per-path min and max of X and max of S2 over the whole path.
    void (*bounds)(int steps, std::size_t n, std::size_t stride, const double* X, const double* S2, double* lo,
                   double* hi, double* s2max);
    /// Survival weight per path: discrete monitoring times the bridge factors
    /// 1 - exp(-2 d_i d_{i+1} / (s2_i dt)) against the barrier nearest each step midpoint.
    void (*survival)(const BridgeArgs& a, std::size_t n, std::size_t stride, const double* X, const double* S2,
                     const double* lo, const double* hi, const double* s2max, double* weight);
};

const Kernels& scalar_kernels();
/// Null when the binary was built without AVX2 support.
const Kernels* avx2_kernels();
bool cpu_has_avx2();

/// AVX2 when the CPU supports it, unless LSV_SIMD=scalar.
Isa active_isa();
const Kernels& kernels(Isa isa);
inline const Kernels& active_kernels() { return kernels(active_isa()); }

}  // namespace lsv::simd
