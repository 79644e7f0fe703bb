#include "lsv/symcalc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "lsv/error.hpp"

namespace lsv {

TimePoly TimePoly::constant(int nvars, cplx c) {
    TimePoly p(nvars);
    p.add_term(Exponents(static_cast<std::size_t>(nvars), 0), c);
    return p;
}

TimePoly TimePoly::variable(int nvars, int var, cplx scale) {
    if (var < 0 || var >= nvars) throw InvalidArgument("time variable index out of range");
    TimePoly p(nvars);
    Exponents e(static_cast<std::size_t>(nvars), 0);
    e[static_cast<std::size_t>(var)] = 1;
    p.add_term(e, scale);
    return p;
}

int TimePoly::degree() const noexcept {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
    return d;
}

void TimePoly::add_term(const Exponents& e, cplx c) {
    if (static_cast<int>(e.size()) != nvars_) throw InvalidArgument("exponent vector has wrong length");
    if (c == cplx(0.0)) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
        it->second += c;
        if (it->second == cplx(0.0)) terms_.erase(it);
    }
}

cplx TimePoly::coefficient(const Exponents& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? cplx(0.0) : it->second;
}

cplx TimePoly::operator()(std::span<const double> r) const {
    if (static_cast<int>(r.size()) != nvars_) throw InvalidArgument("wrong number of time values");
    cplx sum = 0.0;
    for (const auto& [e, c] : terms_) {
        double m = 1.0;
        for (std::size_t i = 0; i < e.size(); ++i) m *= std::pow(r[i], e[i]);
        sum += c * m;
    }
    return sum;
}

double TimePoly::max_imag() const noexcept {
    double m = 0.0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c.imag()));
    return m;
}

TimePoly& TimePoly::operator+=(const TimePoly& o) {
    if (o.nvars_ != nvars_) throw InvalidArgument("adding time polynomials over different variables");
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
}

TimePoly& TimePoly::operator-=(const TimePoly& o) {
    if (o.nvars_ != nvars_) throw InvalidArgument("subtracting time polynomials over different variables");
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
}

TimePoly& TimePoly::operator*=(cplx c) {
    if (c == cplx(0.0)) {
        terms_.clear();
        return *this;
    }
    for (auto& [e, v] : terms_) v *= c;
    return *this;
}

TimePoly operator*(const TimePoly& a, const TimePoly& b) {
    if (a.nvars_ != b.nvars_) throw InvalidArgument("multiplying time polynomials over different variables");
    TimePoly out(a.nvars_);
    TimePoly::Exponents e(static_cast<std::size_t>(a.nvars_));
    for (const auto& [ea, ca] : a.terms_) {
        for (const auto& [eb, cb] : b.terms_) {
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
            out.add_term(e, ca * cb);
        }
    }
    return out;
}

TimePoly TimePoly::widened(int nvars) const {
    if (nvars < nvars_) throw InvalidArgument("cannot narrow a time polynomial");
    TimePoly out(nvars);
    for (const auto& [e, c] : terms_) {
        Exponents w(e);
        w.resize(static_cast<std::size_t>(nvars), 0);
        out.add_term(w, c);
    }
    return out;
}

// ---------------------------------------------------------------------------

PolyExp PolyExp::gaussian(TimePoly alpha, TimePoly beta) {
    if (alpha.nvars() != beta.nvars()) throw InvalidArgument("exponent parts over different variables");
    PolyExp e;
    e.terms.emplace(0, TimePoly::constant(alpha.nvars(), 1.0));
    e.alpha = std::move(alpha);
    e.beta = std::move(beta);
    return e;
}

void PolyExp::normalize() {
    std::erase_if(terms, [](const auto& kv) { return kv.second.is_zero(); });
}

namespace {

void accumulate(std::map<int, TimePoly>& terms, int m, const TimePoly& c, int nvars) {
    if (c.is_zero()) return;
    auto it = terms.try_emplace(m, TimePoly(nvars)).first;
    it->second += c;
}

}  // namespace

PolyExp differentiate(const PolyExp& e, int times) {
    if (times < 0) throw InvalidArgument("negative derivative order");
    PolyExp cur = e;
    const int nv = e.nvars();
    for (int t = 0; t < times; ++t) {
        PolyExp next;
        next.alpha = cur.alpha;
        next.beta = cur.beta;
        // d/dv [c v^m E] = (m c v^(m-1) + alpha c v^m + 2 beta c v^(m+1)) E
        for (const auto& [m, c] : cur.terms) {
            if (m > 0) accumulate(next.terms, m - 1, c * cplx(m), nv);
            accumulate(next.terms, m, cur.alpha * c, nv);
            accumulate(next.terms, m + 1, cur.beta * c * cplx(2.0), nv);
        }
        next.normalize();
        cur = std::move(next);
    }
    return cur;
}

PolyExp multiply_power(const PolyExp& e, int power, cplx factor) {
    if (power < 0) throw InvalidArgument("negative frequency power");
    PolyExp out;
    out.alpha = e.alpha;
    out.beta = e.beta;
    for (const auto& [m, c] : e.terms) accumulate(out.terms, m + power, c * factor, e.nvars());
    out.normalize();
    return out;
}

PolyExp multiply(const PolyExp& a, const PolyExp& b) {
    PolyExp out;
    out.alpha = a.alpha + b.alpha;
    out.beta = a.beta + b.beta;
    for (const auto& [ma, ca] : a.terms)
        for (const auto& [mb, cb] : b.terms) accumulate(out.terms, ma + mb, ca * cb, a.nvars());
    out.normalize();
    return out;
}

PolyExp add(const PolyExp& a, const PolyExp& b) {
    if (!(a.alpha == b.alpha) || !(a.beta == b.beta))
        throw InvalidArgument("adding expressions with different exponents");
    PolyExp out = a;
    for (const auto& [m, c] : b.terms) accumulate(out.terms, m, c, a.nvars());
    out.normalize();
    return out;
}

PolyExp with_exponent(PolyExp e, TimePoly alpha, TimePoly beta) {
    e.alpha = std::move(alpha);
    e.beta = std::move(beta);
    return e;
}

TimePoly eval_at_zero(const PolyExp& e) {
    auto it = e.terms.find(0);
    return it == e.terms.end() ? TimePoly(e.nvars()) : it->second;
}

cplx gaussian_moment(int n, cplx alpha, cplx beta) {
    if (n < 0) throw InvalidArgument("negative moment order");
    cplx prev = 0.0, cur = 1.0;
    for (int q = 0; q < n; ++q) {
        const cplx next = alpha * cur + 2.0 * beta * static_cast<double>(q) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

std::map<int, TimePoly> collapse_chain(std::span<const SectorMonomial> chain, double b, double a) {
    const int j = static_cast<int>(chain.size());
    const cplx I(0.0, 1.0);
    auto exponent = [&](int q) {
        // q is 0-based: r_{q+1}
        return std::pair{TimePoly::variable(j, q, I * b), TimePoly::variable(j, q, -a)};
    };
    if (j == 0) return {{0, TimePoly::constant(0, 1.0)}};
    auto [al, be] = exponent(0);
    PolyExp K = PolyExp::gaussian(al, be);
    for (int q = 0; q < j; ++q) {
        const auto& mono = chain[static_cast<std::size_t>(q)];
        if (mono.power < 0 || mono.deriv < 0) throw InvalidArgument("negative monomial order");
        K = differentiate(K, mono.power);
        cplx f = 1.0;
        for (int p = 0; p < mono.power; ++p) f *= -I;
        for (int p = 0; p < mono.deriv; ++p) f *= I;
        K = multiply_power(K, mono.deriv, f);
        if (q + 1 < j) {
            auto [a2, b2] = exponent(q + 1);
            K = with_exponent(std::move(K), std::move(a2), std::move(b2));
        }
    }
    return K.terms;
}

// ---------------------------------------------------------------------------
// Divided differences of exp(tau z).

namespace {

// Taylor form for a tight cluster: f[x_0..x_n] = e^{tau c} tau^n sum_p h_p(y)/(n+p)!
// with y_i = tau (x_i - c) and h_p the complete homogeneous symmetric polynomial.
template <class T>
T clustered_dd(std::span<const T> x, double tau) {
    const std::size_t count = x.size();
    const int n = static_cast<int>(count) - 1;
    T c = std::accumulate(x.begin(), x.end(), T(0.0)) / static_cast<double>(count);
    constexpr int kTerms = 40;
    // h[p] over the variables processed so far.
    std::array<T, kTerms> h{};
    // Same recursion on |y| bounds the terms; h itself can vanish at odd p.
    std::array<double, kTerms> bound{};
    h[0] = 1.0;
    bound[0] = 1.0;
    for (std::size_t v = 0; v < count; ++v) {
        const T y = tau * (x[v] - c);
        const double ya = std::abs(y);
        for (int p = 1; p < kTerms; ++p) {
            h[p] += y * h[p - 1];
            bound[p] += ya * bound[p - 1];
        }
    }
    T sum = 0.0;
    double inv_fact = 1.0;
    for (int q = 2; q <= n; ++q) inv_fact /= q;
    for (int p = 0; p < kTerms; ++p) {
        sum += h[p] * inv_fact;
        inv_fact /= (n + p + 1);
        if (p + 1 < kTerms && bound[p + 1] * inv_fact < 1e-18 * std::abs(sum)) break;
    }
    return std::exp(tau * c) * std::pow(tau, n) * sum;
}

template <class T>
void check_rates(std::span<const T> nodes, const SimplexOptions& opt) {
    for (const T& z : nodes) {
        if (std::real(z) > opt.positive_rate_tol * (1.0 + std::abs(z)))
            throw InvalidArgument("rate with positive real part in a simplex integral");
    }
}

// Sorted real nodes: a cluster [i..k] has spread x_k - x_i. Works in place on
// x; d must hold x.size() entries.
double real_dd(std::span<double> x, std::span<double> d, double tau, const SimplexOptions& opt) {
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    if (n == 1) return std::exp(tau * x[0]);
    // Row-by-row table; d[i] holds f[x_i..x_{i+len}].
    for (std::size_t i = 0; i < n; ++i) d[i] = std::exp(tau * x[i]);
    for (std::size_t len = 1; len < n; ++len) {
        for (std::size_t i = 0; i + len < n; ++i) {
            const double gap = x[i + len] - x[i];
            if (gap * tau <= opt.confluence_sep)
                d[i] = clustered_dd<double>(std::span<const double>(x.data() + i, len + 1), tau);
            else
                d[i] = (d[i + 1] - d[i]) / gap;
        }
    }
    return d[0];
}

double real_dd(std::vector<double> x, double tau, const SimplexOptions& opt) {
    std::vector<double> d(x.size());
    return real_dd(std::span<double>(x), std::span<double>(d), tau, opt);
}

// Opitz: exp(tau Z) with Z upper bidiagonal (nodes on the diagonal, ones above)
// carries the divided difference in its top-right entry.
cplx matrix_dd(std::span<const cplx> z, double tau) {
    const std::size_t n = z.size();
    double shift = -std::numeric_limits<double>::infinity();
    double spread = 0.0;
    for (const auto& v : z) shift = std::max(shift, v.real());
    for (const auto& v : z) spread = std::max(spread, std::abs(v - shift));
    using Mat = std::vector<cplx>;
    auto at = [n](Mat& m, std::size_t i, std::size_t j) -> cplx& { return m[i * n + j]; };
    Mat A(n * n, 0.0);
    int squarings = 0;
    double norm = tau * (spread + 1.0);
    while (norm > 0.25) {
        norm *= 0.5;
        ++squarings;
    }
    const double scale = tau / std::ldexp(1.0, squarings);
    for (std::size_t i = 0; i < n; ++i) {
        at(A, i, i) = scale * (z[i] - shift);
        if (i + 1 < n) at(A, i, i + 1) = scale;
    }
    auto mul = [&](const Mat& P, const Mat& Q) {
        Mat R(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = i; k < n; ++k) {
                const cplx p = P[i * n + k];
                if (p == cplx(0.0)) continue;
                for (std::size_t j = k; j < n; ++j) R[i * n + j] += p * Q[k * n + j];
            }
        return R;
    };
    Mat E(n * n, 0.0), term(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) at(E, i, i) = at(term, i, i) = 1.0;
    for (int q = 1; q <= 30; ++q) {
        term = mul(term, A);
        for (auto& v : term) v /= static_cast<double>(q);
        for (std::size_t i = 0; i < n * n; ++i) E[i] += term[i];
    }
    for (int s = 0; s < squarings; ++s) E = mul(E, E);
    return std::exp(tau * shift) * E[n - 1];
}

}  // namespace

double exp_divided_difference(std::span<const double> nodes, double tau, const SimplexOptions& opt) {
    if (nodes.empty()) throw InvalidArgument("divided difference needs at least one node");
    if (!(tau >= 0.0)) throw InvalidArgument("negative time span");
    check_rates(nodes, opt);
    return real_dd(std::vector<double>(nodes.begin(), nodes.end()), tau, opt);
}

cplx exp_divided_difference(std::span<const cplx> nodes, double tau, const SimplexOptions& opt) {
    if (nodes.empty()) throw InvalidArgument("divided difference needs at least one node");
    if (!(tau >= 0.0)) throw InvalidArgument("negative time span");
    check_rates(nodes, opt);
    const bool real = std::all_of(nodes.begin(), nodes.end(), [](const cplx& z) { return z.imag() == 0.0; });
    if (real) {
        std::vector<double> x(nodes.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = nodes[i].real();
        return real_dd(std::move(x), tau, opt);
    }
    return matrix_dd(nodes, tau);
}

TimePoly to_segment_lengths(const TimePoly& p) {
    const int n = p.nvars();
    const int nd = n + 1;
    // r_i as a polynomial in the segment lengths, and its powers on demand.
    std::vector<std::vector<TimePoly>> powers(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        TimePoly r(nd);
        for (int m = 0; m <= i; ++m) r += TimePoly::variable(nd, m);
        powers[static_cast<std::size_t>(i)].push_back(TimePoly::constant(nd, 1.0));
        powers[static_cast<std::size_t>(i)].push_back(r);
    }
    auto power = [&](int i, int e) -> const TimePoly& {
        auto& v = powers[static_cast<std::size_t>(i)];
        while (static_cast<int>(v.size()) <= e) v.push_back(v.back() * v[1]);
        return v[static_cast<std::size_t>(e)];
    };
    TimePoly out(nd);
    for (const auto& [e, c] : p.terms()) {
        TimePoly m = TimePoly::constant(nd, c);
        for (int i = 0; i < n; ++i)
            if (e[static_cast<std::size_t>(i)] > 0) m = m * power(i, e[static_cast<std::size_t>(i)]);
        out += m;
    }
    return out;
}

cplx simplex_integrate(const TimePoly& p, std::span<const cplx> rates, double t, double T,
                       const SimplexOptions& opt) {
    if (static_cast<int>(rates.size()) != p.nvars() + 1)
        throw InvalidArgument("simplex integral needs one rate per time segment");
    if (!(T >= t)) throw InvalidArgument("simplex integral requires t <= T");
    const double tau = T - t;
    const TimePoly q = to_segment_lengths(p);
    cplx sum = 0.0;
    std::vector<cplx> nodes;
    // Hermite-Genocchi: int prod d_i^q_i e^{L_i d_i} = prod q_i! f[L_i repeated q_i + 1 times].
    for (const auto& [e, c] : q.terms()) {
        nodes.clear();
        double fact = 1.0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            for (int r = 0; r <= e[i]; ++r) nodes.push_back(rates[i]);
            for (int r = 2; r <= e[i]; ++r) fact *= r;
        }
        sum += c * fact * exp_divided_difference(std::span<const cplx>(nodes), tau, opt);
    }
    return sum;
}

double exp_divided_difference_inplace(std::span<double> nodes, double tau, const SimplexOptions& opt) {
    constexpr std::size_t kStack = 64;
    if (nodes.empty() || nodes.size() > kStack) throw InvalidArgument("in-place divided difference supports 1..64 nodes");
    check_rates(std::span<const double>(nodes.data(), nodes.size()), opt);
    std::array<double, kStack> d;
    return real_dd(nodes, std::span<double>(d.data(), nodes.size()), tau, opt);
}

SimplexPlan::SimplexPlan(const TimePoly& p, SimplexOptions opt) : segments_(p.nvars() + 1), opt_(opt) {
    const TimePoly q = to_segment_lengths(p);
    for (const auto& [e, c] : q.terms()) {
        Term t;
        double fact = 1.0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            t.mult.push_back(e[i] + 1);
            for (int r = 2; r <= e[i]; ++r) fact *= r;
        }
        t.nodes = std::accumulate(t.mult.begin(), t.mult.end(), 0);
        t.coeff = c * fact;
        max_nodes_ = std::max(max_nodes_, t.nodes);
        terms_.push_back(std::move(t));
    }
    if (max_nodes_ > 64) throw InvalidArgument("time polynomial degree too high for the simplex plan");
}

cplx SimplexPlan::integrate(std::span<const double> rates, double tau) const {
    if (static_cast<int>(rates.size()) != segments_) throw InvalidArgument("simplex plan needs one rate per segment");
    std::array<double, 64> buf;
    cplx sum = 0.0;
    for (const auto& t : terms_) {
        int at = 0;
        for (int i = 0; i < segments_; ++i)
            for (int r = 0; r < t.mult[static_cast<std::size_t>(i)]; ++r) buf[static_cast<std::size_t>(at++)] = rates[static_cast<std::size_t>(i)];
        sum += t.coeff * exp_divided_difference_inplace(std::span<double>(buf.data(), static_cast<std::size_t>(at)), tau, opt_);
    }
    return sum;
}

}  // namespace lsv
