#include "lsv/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <variant>

#include <boost/math/distributions/normal.hpp>

#include "lsv/error.hpp"
#include "lsv/parallel.hpp"
#include "lsv/simd.hpp"

namespace lsv {

namespace {

constexpr std::size_t kBlock = 1024;  // samples per block

struct Stats {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
    double survival = 0.0;  // sum of per-sample mean survival weights
};

Stats combine(const Stats& a, const Stats& b) {
    if (a.n == 0.0) return b;
    if (b.n == 0.0) return a;
    Stats r;
    r.n = a.n + b.n;
    const double d = b.mean - a.mean;
    r.mean = a.mean + d * (b.n / r.n);
    r.m2 = a.m2 + b.m2 + d * d * (a.n * b.n / r.n);
    r.survival = a.survival + b.survival;
    return r;
}

// Pairwise in block order, independent of how blocks were scheduled.
Stats reduce(std::span<const Stats> s) {
    if (s.empty()) return {};
    if (s.size() == 1) return s[0];
    const std::size_t h = s.size() / 2;
    return combine(reduce(s.first(h)), reduce(s.subspan(h)));
}

struct Scratch {
    std::vector<double> X, S2, v, z0, z1, lo, hi, s2max, w;
};

struct PathSetup {
    const simd::Kernels* k = nullptr;
    int kind = 0;  // 0 heston, 1 cev, 2 gbm
    simd::HestonStep heston{};
    simd::CevStep cev{};
    simd::GbmStep gbm{};
    double x0 = 0.0, y0 = 0.0, dt = 0.0;
    int steps = 0;
    std::uint64_t seed = 0;
    bool antithetic = false;
};

// Fills s.X / s.S2 for `samples` samples starting at sample index `first`;
// antithetic mirrors occupy the second half.
std::size_t simulate_block(const PathSetup& ps, std::uint64_t first, std::size_t samples, Scratch& s) {
    const std::size_t n = ps.antithetic ? 2 * samples : samples;
    const auto steps = static_cast<std::size_t>(ps.steps);
    s.X.resize((steps + 1) * n);
    s.S2.resize(steps * n);
    s.z0.resize(n);
    s.z1.resize(n);
    s.v.assign(n, ps.y0);
    std::fill_n(s.X.begin(), n, ps.x0);
    const bool two = ps.kind == 0;
    for (std::size_t st = 0; st < steps; ++st) {
        ps.k->normals({ps.seed, first, static_cast<std::uint32_t>(st), 0}, samples, s.z0.data(),
                      two ? s.z1.data() : nullptr);
        if (ps.antithetic)
            for (std::size_t i = 0; i < samples; ++i) {
                s.z0[samples + i] = -s.z0[i];
                if (two) s.z1[samples + i] = -s.z1[i];
            }
        double* x = s.X.data() + (st + 1) * n;
        std::memcpy(x, s.X.data() + st * n, n * sizeof(double));
        double* s2 = s.S2.data() + st * n;
        switch (ps.kind) {
            case 0: ps.k->heston(ps.heston, n, x, s.v.data(), s.z0.data(), s.z1.data(), s2); break;
            case 1: ps.k->cev(ps.cev, n, x, s.z0.data(), s2); break;
            default: ps.k->gbm(ps.gbm, n, x, s.z0.data(), s2); break;
        }
    }
    s.lo.resize(n);
    s.hi.resize(n);
    s.s2max.resize(n);
    s.w.resize(n);
    ps.k->bounds(ps.steps, n, n, s.X.data(), s.S2.data(), s.lo.data(), s.hi.data(), s.s2max.data());
    return n;
}

}  // namespace

std::string to_string(McScheme scheme) {
    return scheme == McScheme::full_truncation_euler ? "full-truncation-euler" : "log-euler";
}

McScheme mc_scheme_from_string(const std::string& name) {
    if (name == "full-truncation-euler") return McScheme::full_truncation_euler;
    if (name == "log-euler") return McScheme::log_euler;
    throw InvalidArgument("unknown mc scheme '" + name + "' (full-truncation-euler, log-euler)");
}

McScheme default_scheme(const BuiltinModel& model) {
    return std::holds_alternative<Heston>(model) ? McScheme::full_truncation_euler : McScheme::log_euler;
}

void validate(const McConfig& cfg) {
    if (cfg.n_paths < 1) throw InvalidArgument("mc n_paths must be >= 1");
    if (cfg.n_steps < 1) throw InvalidArgument("mc n_steps must be >= 1");
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) throw InvalidArgument("mc confidence must lie in (0, 1)");
    if (cfg.antithetic && cfg.n_paths % 2 != 0) throw InvalidArgument("antithetic mc needs an even n_paths");
}

std::vector<McResult> simulate_claims(const BuiltinModel& model, double rho, double t, double x, double y, double T,
                                      std::span<const McTarget> targets, const McConfig& cfg) {
    validate(cfg);
    if (!(T > t)) throw InvalidArgument("mc needs maturity T > t");
    if (std::holds_alternative<Tabulated>(model))
        throw InvalidArgument("tabulated models have no SDE to simulate");
    if (!(rho >= -1.0 && rho <= 1.0)) throw InvalidArgument("rho must lie in [-1, 1]");
    const McScheme scheme = cfg.scheme.value_or(default_scheme(model));
    if (scheme != default_scheme(model))
        throw InvalidArgument("scheme " + to_string(scheme) + " is not available for " + model_name(model));

    PathSetup ps;
    ps.k = &simd::kernels(cfg.isa.value_or(simd::active_isa()));
    ps.steps = cfg.n_steps;
    ps.dt = (T - t) / cfg.n_steps;
    ps.x0 = x;
    ps.y0 = y;
    ps.seed = cfg.seed;
    ps.antithetic = cfg.antithetic;
    const double dt = ps.dt;
    if (const auto* h = std::get_if<Heston>(&model)) {
        if (!(y >= 0.0)) throw InvalidArgument("heston needs a non-negative initial variance");
        ps.kind = 0;
        ps.heston = {h->kappa * dt, h->theta, h->delta, rho, std::sqrt(1.0 - rho * rho), dt, 0.5 * dt};
    } else if (const auto* c = std::get_if<Cev>(&model)) {
        ps.kind = 1;
        ps.cev = {c->sigma, c->gamma - 1.0, 0.5 * dt, std::sqrt(dt)};
    } else {
        const auto& g = std::get<Gbm>(model);
        ps.kind = 2;
        ps.gbm = {-0.5 * g.sigma * g.sigma * dt, g.sigma * std::sqrt(dt), g.sigma * g.sigma};
    }

    const std::size_t samples = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
    const std::size_t blocks = (samples + kBlock - 1) / kBlock;
    const std::size_t nt = targets.size();
    std::vector<Stats> stats(blocks * nt);

    parallel_for(blocks, [&](std::size_t b) {
        thread_local Scratch s;
        const std::uint64_t first = b * kBlock;
        const std::size_t m = std::min(kBlock, samples - b * kBlock);
        const std::size_t n = simulate_block(ps, first, m, s);
        const double* XT = s.X.data() + static_cast<std::size_t>(cfg.n_steps) * n;
        for (std::size_t c = 0; c < nt; ++c) {
            const McTarget& tg = targets[c];
            if (!tg.barriers.contains(x))
                std::fill(s.w.begin(), s.w.end(), 0.0);
            else if (tg.barriers.is_whole_line())
                std::fill(s.w.begin(), s.w.end(), 1.0);
            else
                ps.k->survival({tg.barriers.lower, tg.barriers.upper, dt, cfg.n_steps, cfg.bridge_correction}, n, n,
                               s.X.data(), s.S2.data(), s.lo.data(), s.hi.data(), s.s2max.data(), s.w.data());
            Stats st;
            for (std::size_t i = 0; i < m; ++i) {
                auto value = [&](std::size_t p) {
                    const double pay = tg.payoff(XT[p]);
                    return tg.knock_in ? pay * (1.0 - s.w[p]) : pay * s.w[p];
                };
                double v = value(i), surv = s.w[i];
                if (cfg.antithetic) {
                    v = 0.5 * (v + value(m + i));
                    surv = 0.5 * (surv + s.w[m + i]);
                }
                st.n += 1.0;
                const double d = v - st.mean;
                st.mean += d / st.n;
                st.m2 += d * (v - st.mean);
                st.survival += surv;
            }
            stats[c * blocks + b] = st;
        }
    });

    const double z = boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + cfg.confidence));
    std::vector<McResult> out(nt);
    for (std::size_t c = 0; c < nt; ++c) {
        const Stats st = reduce(std::span<const Stats>(stats).subspan(c * blocks, blocks));
        McResult& r = out[c];
        r.estimate = st.mean;
        r.std_error = st.n > 1.0 ? std::sqrt(st.m2 / (st.n - 1.0) / st.n) : 0.0;
        r.ci_low = r.estimate - z * r.std_error;
        r.ci_high = r.estimate + z * r.std_error;
        r.knocked_out_fraction = 1.0 - st.survival / st.n;
        r.n_paths = cfg.n_paths;
    }
    return out;
}

McResult simulate_price(const BuiltinModel& model, double rho, const Claim& claim, double t, double x, double y,
                        const McConfig& cfg) {
    const McTarget target{claim.payoff, claim.barriers, claim.knock_in};
    return simulate_claims(model, rho, t, x, y, claim.T, std::span<const McTarget>(&target, 1), cfg)[0];
}

}  // namespace lsv
