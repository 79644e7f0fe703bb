#include "lsv/model.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "lsv/error.hpp"

namespace lsv {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int q = 2; q <= n; ++q) f *= q;
    return f;
}

int tabulated_index(Chi chi) {
    switch (chi) {
        case Chi::half_sigma_sq: return 0;
        case Chi::c: return 1;
        case Chi::half_g_sq: return 2;
        case Chi::sigma_g: return 3;
        case Chi::mu: break;
    }
    throw InvalidArgument("tabulated models derive mu from the drift constraint");
}

// Built-in models are analytic; any finite order is available.
constexpr int kAnalyticMaxOrder = 24;

}  // namespace

std::string to_string(Chi chi) {
    switch (chi) {
        case Chi::mu: return "mu";
        case Chi::half_sigma_sq: return "half_sigma_sq";
        case Chi::c: return "c";
        case Chi::half_g_sq: return "half_g_sq";
        case Chi::sigma_g: return "sigma_g";
    }
    return "?";
}

Chi chi_from_string(const std::string& name) {
    for (Chi chi : all_chis)
        if (to_string(chi) == name) return chi;
    throw InvalidArgument("unknown coefficient id '" + name + "'");
}

std::string to_string(FKind kind) {
    return kind == FKind::exponential ? "exponential" : "identity";
}

Interval Interval::between(double L, double U) {
    if (!(L < U)) throw InvalidArgument("interval requires lower < upper");
    return {L, U};
}

std::string model_name(const BuiltinModel& model) {
    struct Visitor {
        std::string operator()(const Heston&) const { return "heston"; }
        std::string operator()(const Cev&) const { return "cev"; }
        std::string operator()(const Gbm&) const { return "gbm"; }
        std::string operator()(const Tabulated&) const { return "tabulated"; }
    };
    return std::visit(Visitor{}, model);
}

ModelSpec::ModelSpec(FKind f_kind, double rho, int max_order, PartialOracle oracle,
                     Interval domain, std::vector<std::string> warnings)
    : f_kind_(f_kind),
      rho_(rho),
      max_order_(max_order),
      oracle_(std::move(oracle)),
      domain_(domain),
      warnings_(std::move(warnings)) {
    if (!(rho > -1.0 && rho < 1.0)) throw InvalidArgument("rho must lie strictly inside (-1, 1)");
    if (max_order < 0) throw InvalidArgument("max_order must be non-negative");
    if (!oracle_) throw InvalidArgument("model requires a partial-derivative oracle");
}

double ModelSpec::partial(Chi chi, int i, int j, double x, double y) const {
    if (i < 0 || j < 0) throw InvalidArgument("negative derivative order");
    if (i + j > max_order_) {
        std::ostringstream os;
        os << "partial of order " << i + j << " requested but model provides up to " << max_order_;
        throw InvalidArgument(os.str());
    }
    if (chi == Chi::mu) {
        if (f_kind_ == FKind::identity) return 0.0;
        const double s = oracle_(Chi::half_sigma_sq, i, j, x, y);
        return drift_partials(f_kind_, std::span<const double>(&s, 1)).front();
    }
    return oracle_(chi, i, j, x, y);
}

ModelSpec ModelSpec::with_rho(double rho) const {
    return ModelSpec(f_kind_, rho, max_order_, oracle_, domain_, warnings_);
}

std::vector<double> drift_partials(FKind f_kind, std::span<const double> half_sigma_sq_partials) {
    std::vector<double> mu(half_sigma_sq_partials.size(), 0.0);
    switch (f_kind) {
        case FKind::exponential:
            // f''/f' = 1, so mu = -sigma^2 / 2 and every partial flips sign.
            for (std::size_t q = 0; q < mu.size(); ++q) mu[q] = -half_sigma_sq_partials[q];
            return mu;
        case FKind::identity:
            return mu;
    }
    throw InvalidArgument("unsupported f_kind");
}

ModelSpec make_model(const BuiltinModel& model, double rho) {
    struct Visitor {
        double rho;

        ModelSpec operator()(const Heston& h) const {
            if (!(h.kappa >= 0.0) || !(h.theta > 0.0) || !(h.delta >= 0.0))
                throw InvalidArgument("heston requires kappa >= 0, theta > 0, delta >= 0");
            std::vector<std::string> warnings;
            if (2.0 * h.kappa * h.theta < h.delta * h.delta)
                warnings.emplace_back("heston parameters violate the Feller condition 2*kappa*theta >= delta^2");
            auto oracle = [h](Chi chi, int i, int j, double, double y) -> double {
                if (!(y > 0.0)) throw InvalidArgument("heston coefficients require y > 0");
                if (i > 0 || j > 1) return 0.0;
                // Every coefficient is affine in y.
                switch (chi) {
                    case Chi::half_sigma_sq: return j == 0 ? 0.5 * y : 0.5;
                    case Chi::c: return j == 0 ? h.kappa * (h.theta - y) : -h.kappa;
                    case Chi::half_g_sq: return j == 0 ? 0.5 * h.delta * h.delta * y : 0.5 * h.delta * h.delta;
                    case Chi::sigma_g: return j == 0 ? h.delta * y : h.delta;
                    case Chi::mu: break;
                }
                return 0.0;
            };
            return ModelSpec(FKind::exponential, rho, kAnalyticMaxOrder, oracle,
                             Interval::whole_line(), std::move(warnings));
        }

        ModelSpec operator()(const Cev& m) const {
            if (!(m.sigma > 0.0) || !(m.gamma > 0.0))
                throw InvalidArgument("cev requires sigma > 0 and gamma > 0");
            auto oracle = [m](Chi chi, int i, int j, double x, double) -> double {
                if (chi != Chi::half_sigma_sq || j > 0) return 0.0;
                const double rate = 2.0 * (m.gamma - 1.0);
                return std::pow(rate, i) * 0.5 * m.sigma * m.sigma * std::exp(rate * x);
            };
            return ModelSpec(FKind::exponential, rho, kAnalyticMaxOrder, oracle);
        }

        ModelSpec operator()(const Gbm& m) const {
            if (!(m.sigma > 0.0)) throw InvalidArgument("gbm requires sigma > 0");
            auto oracle = [m](Chi chi, int i, int j, double, double) -> double {
                if (chi != Chi::half_sigma_sq || i + j > 0) return 0.0;
                return 0.5 * m.sigma * m.sigma;
            };
            return ModelSpec(FKind::exponential, rho, kAnalyticMaxOrder, oracle);
        }

        ModelSpec operator()(const Tabulated& t) const {
            if (t.points.empty()) throw InvalidArgument("tabulated model has no points");
            for (const auto& p : t.points) {
                for (const auto& tri : p.partials) {
                    if (static_cast<int>(tri.size()) != t.max_order + 1)
                        throw InvalidArgument("tabulated partials must cover orders 0..max_order");
                    for (std::size_t n = 0; n < tri.size(); ++n)
                        if (tri[n].size() != n + 1)
                            throw InvalidArgument("tabulated row of order n must hold n + 1 values");
                }
                if (!(p.partials[0][0][0] > 0.0))
                    throw InvalidArgument("tabulated half_sigma_sq must be positive");
                if (p.partials[2][0][0] < 0.0)
                    throw InvalidArgument("tabulated half_g_sq must be non-negative");
            }
            auto oracle = [t](Chi chi, int i, int j, double x, double y) -> double {
                for (const auto& p : t.points) {
                    if (std::abs(p.x - x) <= 1e-12 * (1.0 + std::abs(x)) &&
                        std::abs(p.y - y) <= 1e-12 * (1.0 + std::abs(y)))
                        return p.partials[tabulated_index(chi)][i + j][i];
                }
                std::ostringstream os;
                os << "tabulated model has no partials at (" << x << ", " << y << ")";
                throw InvalidArgument(os.str());
            };
            return ModelSpec(t.f_kind, rho, t.max_order, oracle);
        }
    };
    return std::visit(Visitor{rho}, model);
}

std::vector<TaylorEntry> taylor_coeff(const ModelSpec& model, Chi chi, int n, double xbar,
                                      double ybar) {
    if (n < 0) throw InvalidArgument("taylor order must be non-negative");
    if (n > model.max_order()) throw InvalidArgument("taylor order exceeds the model's max_order");
    std::vector<TaylorEntry> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        const double d = model.partial(chi, i, n - i, xbar, ybar);
        out.push_back({i, n - i, d / (factorial(i) * factorial(n - i))});
    }
    return out;
}

double MultiIndexOp::coefficient(int i, int j, int k, int l) const noexcept {
    double c = 0.0;
    for (const auto& m : terms)
        if (m.i == i && m.j == j && m.k == k && m.l == l) c += m.coeff;
    return c;
}

MultiIndexOp build_operator(const ModelSpec& model, int n, int k, double xbar, double ybar) {
    if (k < 0 || k > 1)
        throw InvalidArgument("correlation operators exist only for k in {0, 1}");
    MultiIndexOp op;
    auto attach = [&](Chi chi, int dk, int dl) {
        for (const auto& e : taylor_coeff(model, chi, n, xbar, ybar))
            if (e.coefficient != 0.0) op.terms.push_back({e.coefficient, e.i, e.j, dk, dl});
    };
    if (k == 0) {
        attach(Chi::mu, 1, 0);
        attach(Chi::half_sigma_sq, 2, 0);
        attach(Chi::c, 0, 1);
        attach(Chi::half_g_sq, 0, 2);
    } else {
        attach(Chi::sigma_g, 1, 1);
    }
    return op;
}

}  // namespace lsv
