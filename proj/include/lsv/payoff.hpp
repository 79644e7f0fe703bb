#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "lsv/model.hpp"

namespace lsv {

using cplx = std::complex<double>;

/// c0 + c1 x + ce e^x on [lo, hi]; either end may be infinite.
struct PayoffPiece {
    double lo = 0.0;
    double hi = 0.0;
    double c0 = 0.0;
    double c1 = 0.0;
    double ce = 0.0;
};

enum class PayoffKind { call, put, digital, table };

std::string to_string(PayoffKind kind);
PayoffKind payoff_kind_from_string(const std::string& name);

/// Terminal payoff as a function of the state x; sums of pieces.
class Payoff {
public:
    Payoff(PayoffKind kind, std::vector<PayoffPiece> pieces, bool discontinuous);

    /// (e^x - e^K)^+ for exponential f, (x - K)^+ for identity f.
    static Payoff call(double strike, FKind f = FKind::exponential);
    static Payoff put(double strike, FKind f = FKind::exponential);
    /// 1 for x > K.
    static Payoff digital(double strike);
    /// Piecewise linear interpolation of (x, value) nodes, zero outside.
    static Payoff table(const std::vector<std::pair<double, double>>& nodes);

    PayoffKind kind() const noexcept { return kind_; }
    const std::vector<PayoffPiece>& pieces() const noexcept { return pieces_; }
    bool discontinuous() const noexcept { return discontinuous_; }
    bool is_zero() const noexcept { return pieces_.empty(); }
    double operator()(double x) const;

    /// Admissible range of Im(w) for the transform int e^{-i w x} phi(x) dx.
    std::pair<double, double> fourier_strip() const;

private:
    PayoffKind kind_;
    std::vector<PayoffPiece> pieces_;
    bool discontinuous_;
};

/// int_lo^hi x^n e^{z x} dx for n in {0, 1}; infinite ends require decay.
cplx exp_moment(int n, cplx z, double lo, double hi);

/// int_lo^hi e^{z x} phi(x) dx restricted to [lo, hi].
cplx payoff_exp_integral(const Payoff& phi, cplx z, double lo, double hi);

}  // namespace lsv
