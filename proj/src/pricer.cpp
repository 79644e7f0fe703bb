#include "lsv/pricer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>

#include "lsv/error.hpp"
#include "lsv/kernels.hpp"
#include "lsv/parallel.hpp"
#include "lsv/quadrature.hpp"
#include "lsv/symcalc.hpp"

namespace lsv {

namespace {

constexpr double kPi = std::numbers::pi;

using XKey = std::vector<std::pair<int, int>>;  // (power, derivative) per insertion

std::vector<SectorMonomial> as_chain(const XKey& key) {
    std::vector<SectorMonomial> c;
    for (const auto& [p, d] : key) c.push_back({p, d});
    return c;
}

/// Spatial sector of the frozen semigroup: values of chains
/// P X_1 P X_2 ... X_j P phi at xbar against a y-sector time polynomial.
class XSector {
public:
    virtual ~XSector() = default;
    virtual cplx leading() = 0;
    virtual cplx chain(const XKey& key, const TimePoly& ypoly) = 0;
};

// ---------------------------------------------------------------------------
// Whole line: the chain collapses symbolically in the frequency and only the
// final frequency integral against the payoff transform stays numeric.

class FourierSector final : public XSector {
public:
    FourierSector(const PriceRequest& req, Frozen fx, Diagnostics& diag)
        : req_(req), fx_(fx), tau_(req.claim.T - req.t), diag_(diag) {
        const auto [lo, hi] = req.claim.payoff.fourier_strip();
        if (!(lo < hi)) throw DivergentTransform("payoff has no Fourier strip");
        if (std::isfinite(lo) && std::isfinite(hi))
            alpha_ = 0.5 * (lo + hi);
        else if (std::isfinite(hi))
            alpha_ = hi - 1.0;
        else if (std::isfinite(lo))
            alpha_ = lo + 1.0;
        else
            alpha_ = 0.0;
    }

    cplx leading() override { return moment(0); }

    cplx chain(const XKey& key, const TimePoly& ypoly) override {
        const auto chain = as_chain(key);
        const auto Q = collapse_chain(chain, fx_.b, fx_.a);
        const int j = static_cast<int>(key.size());
        const std::vector<cplx> zeros(static_cast<std::size_t>(j) + 1, 0.0);
        SimplexOptions opt;
        opt.confluence_sep = req_.numerics.confluence_sep;
        cplx sum = 0.0;
        for (const auto& [m, q] : Q) {
            const TimePoly p = q * ypoly;
            if (p.is_zero()) continue;
            sum += moment(m) * simplex_integrate(p, zeros, req_.t, req_.claim.T, opt);
        }
        return sum;
    }

private:
    // F_m = (1/sqrt(2 pi)) int w^m exp(lambda_w tau) phihat(w) du along w = u + i alpha.
    cplx moment(int m) {
        if (auto it = moments_.find(m); it != moments_.end()) return it->second;
        const double L = -std::log(req_.numerics.tail_tol);
        double omega = std::sqrt(L / (fx_.a * tau_));
        for (int it = 0; it < 8; ++it) omega = std::sqrt((L + m * std::log(std::max(omega, 1.0))) / (fx_.a * tau_));
        const FourierBasis basis{fx_};
        const auto& phi = req_.claim.payoff;
        auto f = [&](double u) -> cplx {
            const cplx w(u, alpha_);
            return std::pow(w, m) * std::exp(basis.eigenvalue(w) * tau_) * fourier_transform(phi, w, req_.x);
        };
        auto re = integrate_panels([&](double u) { return f(u).real(); }, -omega, omega, req_.numerics.quad_tol, 16);
        auto im = integrate_panels([&](double u) { return f(u).imag(); }, -omega, omega, req_.numerics.quad_tol, 16);
        const cplx v = cplx(re.value, im.value) / std::sqrt(2.0 * kPi);
        diag_.omega_max = std::max(diag_.omega_max, omega);
        diag_.quad_error = std::max(diag_.quad_error, std::hypot(re.error, im.error));
        moments_[m] = v;
        return v;
    }

    const PriceRequest& req_;
    Frozen fx_;
    double tau_;
    double alpha_ = 0.0;
    Diagnostics& diag_;
    std::map<int, cplx> moments_;
};

// ---------------------------------------------------------------------------
// Interval: truncated sine series; each insertion couples modes through an
// interval_C table, and each chain of modes carries its own simplex integral.

int modes_needed(const IntervalBasis& basis, double tau, double tail_tol) {
    const double L = -std::log(tail_tol) / tau - basis.x.b * basis.x.b / (4.0 * basis.x.a);
    if (L <= 0.0) return 1;
    return std::max(1, static_cast<int>(std::ceil(basis.width() / kPi * std::sqrt(L / basis.x.a))));
}

class IntervalSector final : public XSector {
public:
    IntervalSector(const PriceRequest& req, const Interval& box, Frozen fx, Diagnostics& diag)
        : basis_{box.lower, box.upper, fx}, xbar_(req.x), tau_(req.claim.T - req.t) {
        const auto& num = req.numerics;
        modes_ = modes_needed(basis_, tau_, num.tail_tol);
        if (modes_ > num.max_modes)
            throw ConvergenceError("interval series needs " + std::to_string(modes_) + " modes, above max_modes");
        chain_modes_ = std::min(num.max_modes, static_cast<int>(std::ceil(num.inner_mode_factor * modes_)));
        chain_modes_ = std::max(chain_modes_, modes_);
        opt_.confluence_sep = num.confluence_sep;
        for (int l = 1; l <= chain_modes_; ++l) {
            nu_.push_back(basis_.eigenvalue(l));
            phi_x_.push_back(basis_.eigenfunction(l, xbar_));
            pay_.push_back(interval_transform(basis_, req.claim.payoff, l));
        }
        diag.modes = std::max(diag.modes, modes_);
        diag.chain_modes = std::max(diag.chain_modes, chain_modes_);
    }

    cplx leading() override {
        double s = 0.0;
        for (int l = 0; l < modes_; ++l) s += phi_x_[l] * std::exp(nu_[l] * tau_) * pay_[l];
        return s;
    }

    cplx chain(const XKey& key, const TimePoly& ypoly) override {
        const int j = static_cast<int>(key.size());
        const SimplexPlan plan(ypoly, opt_);
        if (plan.empty()) return 0.0;
        std::vector<const IntervalCTable*> tables;
        for (const auto& [i, k] : key) tables.push_back(i == 0 && k == 0 ? nullptr : &table(i, k));
        const int M = chain_modes_;
        std::vector<int> l(static_cast<std::size_t>(j) + 1);
        std::vector<double> rates(static_cast<std::size_t>(j) + 1);
        cplx sum = 0.0;
        // Depth-first over l_1..l_{j+1}; identity insertions pin the next mode.
        std::function<void(int, double)> walk = [&](int q, double weight) {
            if (q == j) {
                const double w = weight * pay_[static_cast<std::size_t>(l[q])];
                if (w != 0.0) sum += w * plan.integrate(rates, tau_);
                return;
            }
            const int from = l[static_cast<std::size_t>(q)];
            const IntervalCTable* C = tables[static_cast<std::size_t>(q)];
            auto step = [&](int to, double c) {
                l[static_cast<std::size_t>(q) + 1] = to;
                rates[static_cast<std::size_t>(q) + 1] = nu_[static_cast<std::size_t>(to)];
                walk(q + 1, weight * c);
            };
            if (!C) {
                step(from, 1.0);
                return;
            }
            const double* row = C->row(from + 1);
            for (int to = 0; to < M; ++to)
                if (row[to] != 0.0) step(to, row[to]);
        };
        for (int l1 = 0; l1 < M; ++l1) {
            l[0] = l1;
            rates[0] = nu_[static_cast<std::size_t>(l1)];
            walk(0, phi_x_[static_cast<std::size_t>(l1)]);
        }
        return sum;
    }

private:
    const IntervalCTable& table(int i, int k) {
        auto it = tables_.find({i, k});
        if (it == tables_.end()) it = tables_.emplace(std::pair{i, k}, IntervalCTable(basis_, i, k, xbar_, chain_modes_)).first;
        return it->second;
    }

    IntervalBasis basis_;
    double xbar_, tau_;
    int modes_ = 0, chain_modes_ = 0;
    SimplexOptions opt_;
    std::vector<double> nu_, phi_x_, pay_;
    std::map<std::pair<int, int>, IntervalCTable> tables_;
};

// ---------------------------------------------------------------------------
// Native half-line kernel. Nested frequency integrals with distributional
// couplings: regular part by quadrature, the |w' - w|^(-m-1) part as a
// Hadamard finite part, and the delta^(m) part as an m-th derivative.

class HalfLineSector final : public XSector {
public:
    HalfLineSector(const PriceRequest& req, double L, bool upper, Frozen fx, Diagnostics& diag)
        : req_(req), upper_(upper), tau_(req.claim.T - req.t), diag_(diag) {
        // An upper barrier is the reflection x -> -x of a lower one.
        sign_ = upper ? -1.0 : 1.0;
        basis_ = HalfLineBasis{sign_ * L, {sign_ * fx.b, fx.a}};
        xbar_ = sign_ * req.x;
        const auto& p = req.claim.payoff;
        std::vector<PayoffPiece> pieces;
        for (const auto& q : p.pieces()) {
            if (!upper) {
                pieces.push_back(q);
                continue;
            }
            if (q.ce != 0.0) throw DivergentTransform("reflected exponential payoffs are not supported on the native half-line route");
            pieces.push_back({-q.hi, -q.lo, q.c0, -q.c1, 0.0});
        }
        payoff_ = std::make_unique<Payoff>(p.kind(), pieces, p.discontinuous());
        check_halfline_transform(basis_, *payoff_);
        omega_ = std::sqrt((-std::log(req.numerics.tail_tol) / tau_) / fx.a);
        // Chain integrands decay only algebraically in frequency (the simplex
        // integral does not carry e^{-a w^2 tau}), so they run further out.
        chain_omega_ = std::max(1.0, req.numerics.inner_mode_factor) * omega_;
        diag.omega_max = std::max(diag.omega_max, chain_omega_);
        diag.finite_part = true;
    }

    cplx leading() override {
        auto f = [&](double w) { return basis_.eigenfunction(w, xbar_) * std::exp(basis_.eigenvalue(w) * tau_) * H(w); };
        auto r = integrate_panels(f, 0.0, omega_, req_.numerics.quad_tol, 8);
        diag_.quad_error = std::max(diag_.quad_error, r.error);
        return r.value;
    }

    cplx chain(const XKey& key, const TimePoly& ypoly) override {
        if (key.size() != 1) throw InvalidArgument("native half-line route supports single insertions only");
        const auto [i, k] = key[0];
        // (x - xbar)^i d^k picks up (-1)^(i+k) under the reflection x -> -x.
        const double parity = (upper_ && (i + k) % 2 != 0) ? -1.0 : 1.0;
        SimplexOptions opt;
        opt.confluence_sep = req_.numerics.confluence_sep;
        const SimplexPlan plan(ypoly, opt);
        if (plan.empty()) return 0.0;
        const double tol = req_.numerics.quad_tol;
        auto si = [&](double wp, double w) {
            const double rates[] = {basis_.eigenvalue(wp), basis_.eigenvalue(w)};
            return plan.integrate(rates, tau_).real();
        };
        auto inner = [&](double wp) {
            const std::size_t orders = static_cast<std::size_t>(i) + 1;
            double v = 0.0;
            // Regular part.
            v += integrate_panels(
                     [&](double w) { return halfline_coupling(basis_, wp, w, i, k, xbar_).regular * H(w) * si(wp, w); },
                     0.0, chain_omega_, tol, 8)
                     .value;
            for (std::size_t m = 0; m < orders; ++m) {
                const int mm = static_cast<int>(m);
                auto g = [&](double w) { return halfline_coupling(basis_, wp, w, i, k, xbar_).fp[m] * H(w) * si(wp, w); };
                // (w' - w)^(-m-1) = (-1)^(m+1) (w - w')^(-m-1)
                const double s = (mm % 2 == 0) ? -1.0 : 1.0;
                v += s * hadamard_finite_part(g, wp, mm, 0.0, chain_omega_, tol);
                auto gd = [&](double w) { return halfline_coupling(basis_, wp, w, i, k, xbar_).delta[m] * H(w) * si(wp, w); };
                v += numeric_derivative(gd, wp, mm, 0.25 * std::min(wp, 1.0));
            }
            return v;
        };
        auto outer = [&](double wp) { return basis_.eigenfunction(wp, xbar_) * inner(wp); };
        auto r = integrate_panels(outer, 0.0, chain_omega_, std::max(tol, 1e-7), 8);
        diag_.quad_error = std::max(diag_.quad_error, r.error);
        return parity * r.value;
    }

private:
    double H(double w) {
        if (auto it = h_.find(w); it != h_.end()) return it->second;
        return h_[w] = halfline_transform(basis_, *payoff_, w);
    }

    const PriceRequest& req_;
    bool upper_;
    double tau_, sign_ = 1.0, xbar_ = 0.0, omega_ = 0.0, chain_omega_ = 0.0;
    HalfLineBasis basis_;
    std::unique_ptr<Payoff> payoff_;
    Diagnostics& diag_;
    std::map<double, double> h_;
};

// ---------------------------------------------------------------------------

class Engine {
public:
    Engine(const PriceRequest& req, const Interval& box, Diagnostics& diag) : req_(req), diag_(diag) {
        const auto& m = req.model;
        fx_ = {m.partial(Chi::mu, 0, 0, req.x, req.y), m.partial(Chi::half_sigma_sq, 0, 0, req.x, req.y)};
        fy_ = {m.partial(Chi::c, 0, 0, req.x, req.y), m.partial(Chi::half_g_sq, 0, 0, req.x, req.y)};
        if (!(fx_.a > 0.0)) throw InvalidArgument("frozen x diffusion must be positive");
        if (fy_.a < 0.0) throw InvalidArgument("frozen y diffusion must be non-negative");
        if (box.is_whole_line()) {
            xs_ = std::make_unique<FourierSector>(req, fx_, diag);
        } else if (box.is_bounded()) {
            xs_ = std::make_unique<IntervalSector>(req, box, fx_, diag);
        } else {
            const bool upper = box.has_upper();
            xs_ = std::make_unique<HalfLineSector>(req, upper ? box.upper : box.lower, upper, fx_, diag);
        }
    }

    double leading() {
        const cplx v = xs_->leading();
        diag_.imag_residual = std::max(diag_.imag_residual, std::abs(v.imag()));
        return v.real();
    }

    cplx term(const DysonTerm& t) {
        if (t.zero_operator) return 0.0;
        std::vector<const MultiIndexOp*> ops;
        for (const auto& ins : t.insertions) {
            const auto& op = op_for(ins);
            if (op.is_zero()) return 0.0;
            ops.push_back(&op);
        }
        const int j = t.depth();
        // Group monomial choices by their x-sector chain.
        std::map<XKey, TimePoly> grouped;
        XKey xk(static_cast<std::size_t>(j));
        std::vector<SectorMonomial> yk(static_cast<std::size_t>(j));
        std::function<void(int, double)> pick = [&](int q, double coeff) {
            if (q == j) {
                const TimePoly& yq = ysector(yk);
                if (yq.is_zero()) return;
                auto [it, fresh] = grouped.try_emplace(xk, j);
                it->second += yq * cplx(coeff);
                return;
            }
            for (const auto& mono : ops[static_cast<std::size_t>(q)]->terms) {
                xk[static_cast<std::size_t>(q)] = {mono.i, mono.k};
                yk[static_cast<std::size_t>(q)] = {mono.j, mono.l};
                pick(q + 1, coeff * mono.coeff);
            }
        };
        pick(0, 1.0);
        cplx sum = 0.0;
        for (const auto& [key, poly] : grouped)
            if (!poly.is_zero()) sum += xs_->chain(key, poly);
        return sum;
    }

private:
    const MultiIndexOp& op_for(const Insertion& ins) {
        auto it = ops_.find(ins);
        if (it == ops_.end())
            it = ops_.emplace(ins, build_operator(req_.model, ins.n, ins.k, req_.x, req_.y)).first;
        return it->second;
    }

    // The payoff does not depend on y, so only the delta collapse Q_0 survives.
    const TimePoly& ysector(const std::vector<SectorMonomial>& key) {
        std::vector<std::pair<int, int>> k;
        for (const auto& m : key) k.emplace_back(m.power, m.deriv);
        auto it = ycache_.find(k);
        if (it != ycache_.end()) return it->second;
        auto Q = collapse_chain(key, fy_.b, fy_.a);
        TimePoly q0 = Q.count(0) ? Q.at(0) : TimePoly(static_cast<int>(key.size()));
        return ycache_.emplace(k, std::move(q0)).first->second;
    }

    const PriceRequest& req_;
    Diagnostics& diag_;
    Frozen fx_, fy_;
    std::unique_ptr<XSector> xs_;
    std::map<Insertion, MultiIndexOp> ops_;
    std::map<std::vector<std::pair<int, int>>, TimePoly> ycache_;
};

Route route_for(const PriceRequest& req) {
    const auto& b = req.claim.barriers;
    if (b.is_whole_line()) return Route::european;
    if (b.is_bounded()) return Route::interval;
    return req.numerics.native_halfline ? Route::halfline : Route::far_barrier;
}

double far_distance(const PriceRequest& req) {
    const double a = req.model.partial(Chi::half_sigma_sq, 0, 0, req.x, req.y);
    return 8.0 * std::sqrt(2.0 * a * (req.claim.T - req.t));
}

/// Knock-out price on the given box (no parity, no far-barrier search).
PriceResult price_on(const PriceRequest& req, const Interval& box) {
    PriceResult res;
    auto& diag = res.diagnostics;
    Engine engine(req, box, diag);
    const auto plan = order_plan(req.order);
    const double rho = req.model.rho();
    for (const auto& [n, k] : plan.pairs) {
        double c = 0.0;
        if (n == 0 && k == 0) {
            c = engine.leading();
        } else {
            cplx s = 0.0;
            for (const auto& t : live_terms(n, k)) {
                const auto start = std::chrono::steady_clock::now();
                const cplx v = engine.term(t);
                const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                diag.terms.push_back({t.insertions, v, secs});
                diag.imag_residual = std::max(diag.imag_residual, std::abs(v.imag()));
                s += v;
            }
            diag.imag_residual = std::max(diag.imag_residual, std::abs(s.imag()));
            c = s.real();
        }
        res.contributions[{n, k}] = c;
        res.total += std::pow(rho, k) * c;
    }
    return res;
}

PriceResult price_knock_out(const PriceRequest& req) {
    const auto route = route_for(req);
    const auto& b = req.claim.barriers;
    if (route != Route::far_barrier) {
        auto r = price_on(req, b);
        r.diagnostics.route = route;
        return r;
    }
    // Synthetic far barrier on the open side, pushed out until the price settles.
    // Placement is judged on the terms up to first order: the far barrier
    // enters every order through the same exponentially small factor, while the
    // deeper nested sums carry mode-truncation noise that would mask it.
    double D = far_distance(req);
    const bool upper_open = b.has_lower();
    auto box_for = [&](double d) {
        return upper_open ? Interval::between(b.lower, req.x + d) : Interval::between(req.x - d, b.upper);
    };
    PriceRequest probe = req;
    probe.order = std::min(req.order, 1);
    PriceResult prev = price_on(probe, box_for(D));
    for (int it = 0; it < 8; ++it) {
        PriceResult cur = price_on(probe, box_for(2.0 * D));
        if (std::abs(cur.total - prev.total) < 0.1 * req.numerics.far_barrier_tol) {
            // The move from D to 2D is negligible, so D is already far enough.
            PriceResult r = req.order == probe.order ? std::move(prev) : price_on(req, box_for(D));
            r.diagnostics.route = Route::far_barrier;
            r.diagnostics.far_barrier = upper_open ? req.x + D : req.x - D;
            return r;
        }
        prev = std::move(cur);
        D *= 2.0;
    }
    throw ConvergenceError("far-barrier price did not settle");
}

}  // namespace

std::string to_string(Route route) {
    switch (route) {
        case Route::european: return "european";
        case Route::interval: return "interval";
        case Route::far_barrier: return "far-barrier";
        case Route::halfline: return "half-line";
    }
    return "unknown";
}

void validate(const PriceRequest& req) {
    const auto& c = req.claim;
    if (!(req.t < c.T)) throw InvalidArgument("evaluation time must be before maturity");
    if (req.order < 0) throw InvalidArgument("order must be non-negative");
    if (!c.barriers.contains(req.x)) throw InvalidArgument("x must lie strictly inside the barriers");
    if (!req.model.domain().contains(req.x)) throw InvalidArgument("x outside the model domain");
    if (c.barriers.has_lower() && c.barriers.has_upper() && !(c.barriers.lower < c.barriers.upper))
        throw InvalidArgument("barriers require L < U");
    if (c.knock_in && c.barriers.is_whole_line()) throw InvalidArgument("knock-in claim needs a barrier");
    const auto& n = req.numerics;
    if (!(n.quad_tol > 0.0) || !(n.tail_tol > 0.0 && n.tail_tol < 1.0) || !(n.far_barrier_tol > 0.0))
        throw InvalidArgument("numerical tolerances must be positive");
    if (n.max_modes < 1 || !(n.inner_mode_factor >= 1.0)) throw InvalidArgument("invalid mode limits");
    if (!(n.confluence_sep > 0.0)) throw InvalidArgument("confluence separation must be positive");
}

double price_u00(const PriceRequest& req) {
    PriceRequest r = req;
    r.order = 0;
    return price(r).total;
}

cplx evaluate_term(const PriceRequest& req, const DysonTerm& term) {
    validate(req);
    for (const auto& ins : term.insertions)
        if (ins.k >= 2) throw InvalidArgument("correlation insertions of order >= 2 do not exist");
    Diagnostics diag;
    Interval box = req.claim.barriers;
    if (route_for(req) == Route::far_barrier) {
        const double D = 2.0 * far_distance(req);
        box = box.has_lower() ? Interval::between(box.lower, req.x + D) : Interval::between(req.x - D, box.upper);
    }
    Engine engine(req, box, diag);
    return engine.term(term);
}

PriceResult price(const PriceRequest& req) {
    validate(req);
    std::vector<std::string> warnings = req.model.warnings();
    if (req.claim.payoff.discontinuous())
        warnings.push_back("discontinuous payoff: the expansion converges more slowly");
    if (req.order >= 3) warnings.push_back("orders above 2 are experimental");
    if (req.numerics.native_halfline && route_for(req) == Route::halfline)
        warnings.push_back("native half-line kernel with finite-part quadrature is experimental");
    PriceResult res;
    if (req.claim.knock_in) {
        PriceRequest euro = req;
        euro.claim.barriers = Interval::whole_line();
        euro.claim.knock_in = false;
        const auto e = price_on(euro, euro.claim.barriers);
        res = price_knock_out(req);
        res.total = e.total - res.total;
        for (auto& [key, v] : res.contributions) v = e.contributions.at(key) - v;
        res.diagnostics.imag_residual = std::max(res.diagnostics.imag_residual, e.diagnostics.imag_residual);
        res.diagnostics.omega_max = e.diagnostics.omega_max;
    } else {
        res = price_knock_out(req);
    }
    auto& w = res.diagnostics.warnings;
    w.insert(w.begin(), warnings.begin(), warnings.end());
    return res;
}

SweepAxis sweep_axis_from_string(const std::string& name) {
    if (name == "L") return SweepAxis::L;
    if (name == "U") return SweepAxis::U;
    throw InvalidArgument("sweep axis must be L or U, got '" + name + "'");
}

std::string to_string(SweepAxis axis) { return axis == SweepAxis::L ? "L" : "U"; }

std::vector<SweepRow> sweep(const PriceRequest& req, SweepAxis axis, std::span<const double> grid) {
    if (grid.empty()) throw InvalidArgument("sweep grid is empty");
    std::vector<SweepRow> rows(grid.size());
    parallel_for(grid.size(), [&](std::size_t g) {
        PriceRequest r = req;
        auto& b = r.claim.barriers;
        (axis == SweepAxis::L ? b.lower : b.upper) = grid[g];
        auto res = price(r);
        rows[g].value = grid[g];
        rows[g].u0 = res.contributions.at({0, 0});
        rows[g].uN = res.total;
        rows[g].result = std::move(res);
    });
    return rows;
}

}  // namespace lsv
