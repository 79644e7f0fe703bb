#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsv/model.hpp"
#include "lsv/payoff.hpp"
#include "lsv/pricer.hpp"
#include "lsv/simd.hpp"

namespace lsv {

enum class McScheme { full_truncation_euler, log_euler };
std::string to_string(McScheme scheme);
McScheme mc_scheme_from_string(const std::string& name);
/// Full-truncation Euler for Heston, log-Euler (exact for GBM) otherwise.
McScheme default_scheme(const BuiltinModel& model);

struct McConfig {
    std::size_t n_paths = 1'000'000;
    int n_steps = 250;
    std::uint64_t seed = 1;
    /// Unset picks default_scheme().
    std::optional<McScheme> scheme;
    bool bridge_correction = true;
    double confidence = 0.99;
    /// Pairs each path with its mirror (negated normals); n_paths must be even.
    bool antithetic = false;
    /// Kernel set; unset follows simd::active_isa().
    std::optional<simd::Isa> isa;
};

struct McResult {
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    /// Average knock-out probability of a path (1 - mean survival weight).
    double knocked_out_fraction = 0.0;
    std::size_t n_paths = 0;
};

/// One payoff/barrier pair evaluated on shared paths.
struct McTarget {
    Payoff payoff = Payoff::call(0.0);
    Interval barriers;
    bool knock_in = false;
};

void validate(const McConfig& cfg);

/// Prices every target on the same set of paths started at (x, y) at time t and
/// run to T. Results are identical for any worker count and SIMD level.
std::vector<McResult> simulate_claims(const BuiltinModel& model, double rho, double t, double x, double y, double T,
                                      std::span<const McTarget> targets, const McConfig& cfg);

McResult simulate_price(const BuiltinModel& model, double rho, const Claim& claim, double t, double x, double y,
                        const McConfig& cfg);

}  // namespace lsv
