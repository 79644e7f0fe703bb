#pragma once

#include <complex>
#include <map>
#include <span>
#include <vector>

namespace lsv {

using cplx = std::complex<double>;

/// Polynomial with complex coefficients in the offsets r_i = s_i - t of the
/// ordered simplex times t <= s_1 <= ... <= s_n <= T.
class TimePoly {
public:
    using Exponents = std::vector<int>;

    explicit TimePoly(int nvars = 0) : nvars_(nvars) {}
    static TimePoly constant(int nvars, cplx c);
    /// scale * r_var (0-based variable index).
    static TimePoly variable(int nvars, int var, cplx scale = 1.0);

    int nvars() const noexcept { return nvars_; }
    const std::map<Exponents, cplx>& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }
    int degree() const noexcept;

    /// Adds c * prod r_i^e_i; cancelling terms are erased.
    void add_term(const Exponents& e, cplx c);
    cplx coefficient(const Exponents& e) const;
    cplx operator()(std::span<const double> r) const;
    /// Largest |imaginary part| among the coefficients.
    double max_imag() const noexcept;

    TimePoly& operator+=(const TimePoly& o);
    TimePoly& operator-=(const TimePoly& o);
    TimePoly& operator*=(cplx c);
    friend TimePoly operator+(TimePoly a, const TimePoly& b) { return a += b; }
    friend TimePoly operator-(TimePoly a, const TimePoly& b) { return a -= b; }
    friend TimePoly operator*(TimePoly a, cplx c) { return a *= c; }
    friend TimePoly operator*(cplx c, TimePoly a) { return a *= c; }
    friend TimePoly operator*(const TimePoly& a, const TimePoly& b);
    friend bool operator==(const TimePoly& a, const TimePoly& b) = default;

    /// Same polynomial embedded in a space with more variables.
    TimePoly widened(int nvars) const;

private:
    int nvars_;
    std::map<Exponents, cplx> terms_;
};

/// sum_m c_m(r) v^m * exp(alpha(r) v + beta(r) v^2) in one frequency variable v.
/// beta is kept as a time polynomial because each free segment contributes
/// -a * (segment length) to it.
struct PolyExp {
    std::map<int, TimePoly> terms;  // frequency power -> coefficient
    TimePoly alpha;
    TimePoly beta;

    int nvars() const noexcept { return alpha.nvars(); }
    /// exp(alpha v + beta v^2) with unit coefficient.
    static PolyExp gaussian(TimePoly alpha, TimePoly beta);

    /// Removes zero coefficients.
    void normalize();
    friend bool operator==(const PolyExp& a, const PolyExp& b) = default;
};

/// Exact n-th derivative in v; the exponent is unchanged.
PolyExp differentiate(const PolyExp& e, int times = 1);
/// factor * v^power * e
PolyExp multiply_power(const PolyExp& e, int power, cplx factor = 1.0);
/// Product of two expressions; exponents add.
PolyExp multiply(const PolyExp& a, const PolyExp& b);
PolyExp add(const PolyExp& a, const PolyExp& b);
/// Replaces the exponent while keeping the coefficients.
PolyExp with_exponent(PolyExp e, TimePoly alpha, TimePoly beta);
/// Value at v = 0: the m = 0 coefficient.
TimePoly eval_at_zero(const PolyExp& e);

/// H_n(alpha, beta) = d^n/dv^n exp(alpha v + beta v^2) at v = 0, for scalars.
cplx gaussian_moment(int n, cplx alpha, cplx beta);

/// Monomial (z - zbar)^power d_z^deriv of one state sector.
struct SectorMonomial {
    int power = 0;
    int deriv = 0;
};

/// Frequency-space collapse of a chain of monomials, one per insertion, for
/// the frozen sector generator b d_z + a d_z^2. Starting from exp(lambda_v r_1)
/// with lambda_v = i b v - a v^2, insertion q maps K to (i v)^deriv (-i d_v)^power K
/// and then extends the exponent to lambda_v r_{q+1}. Returns the coefficients
/// Q_m(r_1..r_j) of v^m multiplying the final exp(lambda_v (T - t)).
/// Q_0 is the value against a state-independent payoff (the delta collapse).
std::map<int, TimePoly> collapse_chain(std::span<const SectorMonomial> chain, double b, double a);

struct SimplexOptions {
    /// Node clusters whose spread times (T - t) is below this use a Taylor
    /// expansion of the divided difference instead of the difference quotient.
    double confluence_sep = 0.5;
    /// Largest admissible real part of a rate.
    double positive_rate_tol = 1e-9;
};

/// Divided difference of z -> exp(tau z) over the given nodes (repeats allowed).
double exp_divided_difference(std::span<const double> nodes, double tau,
                              const SimplexOptions& opt = {});
cplx exp_divided_difference(std::span<const cplx> nodes, double tau,
                            const SimplexOptions& opt = {});

/// Rewrites p(r_1..r_n) in the segment lengths d_1..d_{n+1}, where
/// r_i = d_1 + ... + d_i and d_{n+1} = T - s_n.
TimePoly to_segment_lengths(const TimePoly& p);

/// int_t^T ds_1 int_{s_1}^T ds_2 ... p(s - t) prod_i exp(rates_i (s_i - s_{i-1})) exp(rates_{n+1} (T - s_n)).
cplx simplex_integrate(const TimePoly& p, std::span<const cplx> rates, double t, double T,
                       const SimplexOptions& opt = {});

/// exp_divided_difference for real nodes that reorders `nodes` in place and
/// never allocates; at most 64 nodes.
double exp_divided_difference_inplace(std::span<double> nodes, double tau, const SimplexOptions& opt = {});

/// A time polynomial prepared for repeated simplex integration against many
/// real rate chains (the interval route evaluates one per mode chain).
class SimplexPlan {
public:
    explicit SimplexPlan(const TimePoly& p, SimplexOptions opt = {});
    int segments() const noexcept { return segments_; }
    bool empty() const noexcept { return terms_.empty(); }
    /// Same value as simplex_integrate(p, rates, t, t + tau).
    cplx integrate(std::span<const double> rates, double tau) const;

private:
    struct Term {
        std::vector<int> mult;  // node multiplicity per segment
        int nodes = 0;
        cplx coeff;
    };
    int segments_;
    SimplexOptions opt_;
    int max_nodes_ = 0;
    std::vector<Term> terms_;
};

}  // namespace lsv
