#include "lsv/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lsv/error.hpp"

namespace lsv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// (e^w - 1) / w and (e^w (w - 1) + 1) / w^2, with series near zero.
cplx expm1_ratio(cplx w) {
    if (std::abs(w) > 0.5) return (std::exp(w) - 1.0) / w;
    cplx sum = 0.0, term = 1.0;
    for (int k = 1; k < 30; ++k) {
        term /= static_cast<double>(k);
        sum += term;
        term *= w;
        if (std::abs(term) < 1e-18) break;
    }
    return sum;
}

cplx second_ratio(cplx w) {
    if (std::abs(w) > 0.5) return (std::exp(w) * (w - 1.0) + 1.0) / (w * w);
    // sum_k w^k / (k! (k + 2))
    cplx sum = 0.0, pw = 1.0;
    double fact = 1.0;
    for (int k = 0; k < 30; ++k) {
        if (k > 0) fact *= k;
        const cplx term = pw / (fact * (k + 2));
        sum += term;
        if (std::abs(term) < 1e-18) break;
        pw *= w;
    }
    return sum;
}

}  // namespace

std::string to_string(PayoffKind kind) {
    switch (kind) {
        case PayoffKind::call: return "call";
        case PayoffKind::put: return "put";
        case PayoffKind::digital: return "digital";
        case PayoffKind::table: return "custom-table";
    }
    return "?";
}

PayoffKind payoff_kind_from_string(const std::string& name) {
    for (auto k : {PayoffKind::call, PayoffKind::put, PayoffKind::digital, PayoffKind::table})
        if (to_string(k) == name) return k;
    throw InvalidArgument("unknown payoff '" + name + "'");
}

Payoff::Payoff(PayoffKind kind, std::vector<PayoffPiece> pieces, bool discontinuous)
    : kind_(kind), pieces_(std::move(pieces)), discontinuous_(discontinuous) {
    for (const auto& p : pieces_)
        if (!(p.lo < p.hi)) throw InvalidArgument("payoff piece with empty support");
}

Payoff Payoff::call(double strike, FKind f) {
    if (!std::isfinite(strike)) throw InvalidArgument("strike must be finite");
    if (f == FKind::exponential) return Payoff(PayoffKind::call, {{strike, kInf, -std::exp(strike), 0.0, 1.0}}, false);
    return Payoff(PayoffKind::call, {{strike, kInf, -strike, 1.0, 0.0}}, false);
}

Payoff Payoff::put(double strike, FKind f) {
    if (!std::isfinite(strike)) throw InvalidArgument("strike must be finite");
    if (f == FKind::exponential) return Payoff(PayoffKind::put, {{-kInf, strike, std::exp(strike), 0.0, -1.0}}, false);
    return Payoff(PayoffKind::put, {{-kInf, strike, strike, -1.0, 0.0}}, false);
}

Payoff Payoff::digital(double strike) {
    if (std::isnan(strike) || strike == kInf) throw InvalidArgument("digital strike must be below +inf");
    return Payoff(PayoffKind::digital, {{strike, kInf, 1.0, 0.0, 0.0}}, std::isfinite(strike));
}

Payoff Payoff::table(const std::vector<std::pair<double, double>>& nodes) {
    if (nodes.size() < 2) throw InvalidArgument("payoff table needs at least two nodes");
    std::vector<PayoffPiece> pieces;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const auto [x0, v0] = nodes[i];
        const auto [x1, v1] = nodes[i + 1];
        if (!std::isfinite(x0) || !std::isfinite(x1) || !std::isfinite(v0) || !std::isfinite(v1))
            throw InvalidArgument("payoff table entries must be finite");
        if (!(x1 > x0)) throw InvalidArgument("payoff table abscissae must increase strictly");
        const double slope = (v1 - v0) / (x1 - x0);
        if (v0 == 0.0 && v1 == 0.0) continue;
        pieces.push_back({x0, x1, v0 - slope * x0, slope, 0.0});
    }
    const bool jump = nodes.front().second != 0.0 || nodes.back().second != 0.0;
    return Payoff(PayoffKind::table, std::move(pieces), jump);
}

double Payoff::operator()(double x) const {
    double v = 0.0;
    for (const auto& p : pieces_) {
        if (x < p.lo || x > p.hi) continue;
        // Half-open pieces avoid double counting shared table nodes.
        if (x == p.hi && std::isfinite(p.hi) && kind_ == PayoffKind::table && &p != &pieces_.back()) continue;
        v += p.c0 + p.c1 * x + (p.ce != 0.0 ? p.ce * std::exp(x) : 0.0);
    }
    return v;
}

std::pair<double, double> Payoff::fourier_strip() const {
    // e^{-i w x} = e^{Im(w) x} e^{-i Re(w) x}: growth at +inf needs Im(w) + rate < 0.
    double lo = -kInf, hi = kInf;
    for (const auto& p : pieces_) {
        const bool poly = p.c0 != 0.0 || p.c1 != 0.0;
        const bool expo = p.ce != 0.0;
        if (p.hi == kInf) {
            if (poly) hi = std::min(hi, 0.0);
            if (expo) hi = std::min(hi, -1.0);
        }
        if (p.lo == -kInf) {
            if (poly) lo = std::max(lo, 0.0);
            if (expo) lo = std::max(lo, -1.0);
        }
    }
    return {lo, hi};
}

cplx exp_moment(int n, cplx z, double lo, double hi) {
    if (n < 0 || n > 1) throw InvalidArgument("exp_moment supports n in {0, 1}");
    if (!(lo < hi)) return 0.0;
    const bool lo_inf = lo == -kInf, hi_inf = hi == kInf;
    if (lo_inf && hi_inf) throw DivergentTransform("exponential moment over the whole line diverges");
    if (lo_inf || hi_inf) {
        const double end = lo_inf ? hi : lo;
        if (lo_inf ? !(z.real() > 0.0) : !(z.real() < 0.0))
            throw DivergentTransform("exponential moment diverges at an infinite end");
        // Antiderivative e^{zx} (x/z - 1/z^2) (n = 1) or e^{zx}/z (n = 0) vanishes at the infinite end.
        const cplx e = std::exp(z * end);
        const cplx F = n == 0 ? e / z : e * (end / z - 1.0 / (z * z));
        return lo_inf ? F : -F;
    }
    const double h = hi - lo;
    const cplx w = z * h;
    const cplx e = std::exp(z * lo);
    const cplx m0 = h * expm1_ratio(w);
    if (n == 0) return e * m0;
    return e * (lo * m0 + h * h * second_ratio(w));
}

cplx payoff_exp_integral(const Payoff& phi, cplx z, double lo, double hi) {
    cplx sum = 0.0;
    for (const auto& p : phi.pieces()) {
        const double a = std::max(lo, p.lo), b = std::min(hi, p.hi);
        if (!(a < b)) continue;
        if (p.c0 != 0.0) sum += p.c0 * exp_moment(0, z, a, b);
        if (p.c1 != 0.0) sum += p.c1 * exp_moment(1, z, a, b);
        if (p.ce != 0.0) sum += p.ce * exp_moment(0, z + 1.0, a, b);
    }
    return sum;
}

}  // namespace lsv
