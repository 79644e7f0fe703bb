#pragma once

#include <complex>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lsv/expansion.hpp"
#include "lsv/model.hpp"
#include "lsv/payoff.hpp"

namespace lsv {

using cplx = std::complex<double>;

/// Terminal payoff, knock-out barriers and maturity. A whole-line interval is a
/// European claim.
struct Claim {
    Payoff payoff = Payoff::call(0.0);
    Interval barriers;
    double T = 0.0;
    /// Price the matching knock-in claim by parity (European minus knock-out).
    bool knock_in = false;
};

struct Numerics {
    /// Relative tolerance of the frequency quadratures.
    double quad_tol = 1e-10;
    /// Modes are truncated once exp(rate * (T - t)) falls below this.
    double tail_tol = 1e-14;
    double confluence_sep = 0.5;
    int max_modes = 4096;
    /// Nested mode sums converge algebraically, so they run over this many
    /// times the modes needed by the leading term.
    double inner_mode_factor = 4.0;
    /// Synthetic far barriers are pushed out until the price moves less than
    /// a tenth of this.
    double far_barrier_tol = 1e-8;
    /// Price single-barrier claims on the half-line kernel instead of the
    /// far-barrier interval route (experimental, depth <= 1).
    bool native_halfline = false;
};

struct PriceRequest {
    ModelSpec model;
    Claim claim;
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    int order = 0;
    Numerics numerics;
};

enum class Route { european, interval, far_barrier, halfline };
std::string to_string(Route route);

struct TermDiagnostics {
    std::vector<Insertion> insertions;
    cplx value;
    double seconds = 0.0;
};

struct Diagnostics {
    Route route = Route::european;
    /// Largest discarded imaginary part, over terms and the total.
    double imag_residual = 0.0;
    /// Interval modes of the leading term and of the nested sums.
    int modes = 0;
    int chain_modes = 0;
    /// Frequency cut-off of the Fourier or half-line quadratures.
    double omega_max = 0.0;
    double quad_error = 0.0;
    double far_barrier = std::numeric_limits<double>::quiet_NaN();
    bool finite_part = false;
    std::vector<TermDiagnostics> terms;
    std::vector<std::string> warnings;
};

struct PriceResult {
    double total = 0.0;
    /// rho-free contributions u_{n,k}; total = sum rho^k * contribution.
    std::map<std::pair<int, int>, double> contributions;
    Diagnostics diagnostics;
};

/// Throws InvalidArgument for inconsistent requests.
void validate(const PriceRequest& req);

double price_u00(const PriceRequest& req);
/// One Duhamel term, without its rho weight.
cplx evaluate_term(const PriceRequest& req, const DysonTerm& term);
PriceResult price(const PriceRequest& req);

enum class SweepAxis { L, U };
SweepAxis sweep_axis_from_string(const std::string& name);
std::string to_string(SweepAxis axis);

struct SweepRow {
    double value = 0.0;
    double u0 = 0.0;
    double uN = 0.0;
    PriceResult result;
};

/// Prices the request with one barrier replaced by each grid value; rows keep
/// grid order whatever the worker count.
std::vector<SweepRow> sweep(const PriceRequest& req, SweepAxis axis, std::span<const double> grid);

}  // namespace lsv
