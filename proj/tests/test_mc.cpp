#include <cmath>
#include <cstdlib>
#include <limits>

#include "doctest.h"
#include "lsv/error.hpp"
#include "lsv/mc.hpp"
#include "oracles.hpp"

using namespace lsv;

namespace {

const double inf = std::numeric_limits<double>::infinity();
const Heston kHeston{1.15, 0.04, 0.2};
constexpr double kRho = -0.4, kX = 0.62, kY = 0.04, kT = 0.083;

McConfig config(std::size_t paths, int steps, std::uint64_t seed = 11) {
    McConfig c;
    c.n_paths = paths;
    c.n_steps = steps;
    c.seed = seed;
    return c;
}

double joint(const McResult& a, const McResult& b) { return std::hypot(a.std_error, b.std_error); }

}  // namespace

TEST_CASE("GBM European call matches Black-Scholes") {
    // log-Euler is exact for GBM, so one step suffices.
    const auto r = simulate_price(Gbm{0.2}, 0.0, {Payoff::call(0.05), {}, 0.5}, 0.0, 0.0, 0.0, config(1'000'000, 1));
    const double want = oracle::bs_call(1.0, std::exp(0.05), 0.2, 0.5);
    CHECK(std::fabs(r.estimate - want) < 3.0 * r.std_error);
    CHECK(r.knocked_out_fraction == 0.0);
    CHECK(r.ci_high - r.estimate == doctest::Approx(r.estimate - r.ci_low));
    CHECK(r.ci_low < r.estimate);
}

TEST_CASE("bridge correction removes the discrete-monitoring bias for GBM") {
    // For Brownian motion with drift the bridge factor is the exact crossing
    // probability given the endpoints, so even coarse steps are unbiased.
    const double L = -0.1;
    const Claim claim{Payoff::call(0.0), Interval::above(L), 0.25};
    auto phi = [](double y) { return std::max(std::exp(y) - 1.0, 0.0); };
    const double want = oracle::killed_gbm_price(phi, 0.0, 0.3, 0.25, L, inf, {0.0});
    auto cfg = config(400'000, 10);
    const auto on = simulate_price(Gbm{0.3}, 0.0, claim, 0.0, 0.0, 0.0, cfg);
    CHECK(std::fabs(on.estimate - want) < 3.5 * on.std_error);
    cfg.bridge_correction = false;
    const auto off = simulate_price(Gbm{0.3}, 0.0, claim, 0.0, 0.0, 0.0, cfg);
    CHECK(off.estimate > want + 5.0 * off.std_error);
    CHECK(on.knocked_out_fraction > off.knocked_out_fraction);
}

TEST_CASE("GBM double barrier with bridge correction") {
    const Claim claim{Payoff::call(0.62), Interval::between(0.4, 0.8), 0.25};
    auto phi = [](double y) { return std::max(std::exp(y) - std::exp(0.62), 0.0); };
    const double want = oracle::killed_gbm_price(phi, 0.62, 0.2, 0.25, 0.4, 0.8, {0.62});
    const auto r = simulate_price(Gbm{0.2}, 0.0, claim, 0.0, 0.62, 0.0, config(400'000, 50));
    CHECK(std::fabs(r.estimate - want) < 3.5 * r.std_error);
}

TEST_CASE("CEV European call matches the noncentral chi-square formula") {
    const auto r = simulate_price(Cev{0.32, 0.019}, 0.0, {Payoff::call(kX), {}, kT}, 0.0, kX, 0.0,
                                  config(400'000, 50));
    const double want = oracle::cev_call(std::exp(kX), std::exp(kX), 0.32, 0.019, kT);
    CHECK(std::fabs(r.estimate - want) < 3.5 * r.std_error);
}

TEST_CASE("Heston European put matches the characteristic-function price") {
    const auto r = simulate_price(kHeston, kRho, {Payoff::put(kX), {}, kT}, 0.0, kX, kY, config(200'000, 100));
    const double want = oracle::heston_put(kX, kY, kX, {1.15, 0.04, 0.2, kRho}, kT);
    CHECK(std::fabs(r.estimate - want) < 3.5 * r.std_error);
}

TEST_CASE("spot outside the barriers is knocked out") {
    const Claim claim{Payoff::call(0.62), Interval::between(0.7 - 1e-3, 0.7), kT};
    const auto r = simulate_price(kHeston, kRho, claim, 0.0, kX, kY, config(1000, 10));
    CHECK(r.estimate == 0.0);
    CHECK(r.std_error == 0.0);
    CHECK(r.knocked_out_fraction == 1.0);
}

TEST_CASE("knock-in and knock-out add up to the European price pathwise") {
    const auto cfg = config(20'000, 50);
    std::vector<McTarget> t = {{Payoff::call(kX), {}, false},
                               {Payoff::call(kX), Interval::between(0.5, 0.7), false},
                               {Payoff::call(kX), Interval::between(0.5, 0.7), true}};
    const auto r = simulate_claims(kHeston, kRho, 0.0, kX, kY, kT, t, cfg);
    CHECK(r[1].estimate + r[2].estimate == doctest::Approx(r[0].estimate).epsilon(1e-12));
}

TEST_CASE("bias ordering: bridge correction only lowers knock-out prices") {
    auto cfg = config(100'000, 250);
    const Claim claim{Payoff::put(kX), Interval::between(0.5, 1.0), kT};
    const auto on = simulate_price(kHeston, kRho, claim, 0.0, kX, kY, cfg);
    cfg.bridge_correction = false;
    const auto off = simulate_price(kHeston, kRho, claim, 0.0, kX, kY, cfg);
    CHECK(on.estimate <= off.estimate + 3.0 * joint(on, off));
    CHECK(on.estimate < off.estimate);  // same paths, weights never exceed the indicator
}

TEST_CASE("step halving is stable at 250 steps") {
    const Claim claim{Payoff::call(kX), Interval::between(0.0, 0.8), kT};
    const auto a = simulate_price(kHeston, kRho, claim, 0.0, kX, kY, config(100'000, 250, 1));
    const auto b = simulate_price(kHeston, kRho, claim, 0.0, kX, kY, config(100'000, 500, 2));
    CHECK(std::fabs(a.estimate - b.estimate) < 3.0 * joint(a, b));
    // Standard error at 1e5 paths projects below 2e-5 at 1e7.
    CHECK(a.std_error * std::sqrt(1e5 / 1e7) < 2e-5);
}

TEST_CASE("antithetic pairs reduce variance") {
    SUBCASE("GBM call at 1e5 pairs") {
        auto cfg = config(200'000, 1);
        const Claim claim{Payoff::call(0.0), {}, 0.5};
        const auto plain = simulate_price(Gbm{0.2}, 0.0, claim, 0.0, 0.0, 0.0, cfg);
        cfg.antithetic = true;
        const auto anti = simulate_price(Gbm{0.2}, 0.0, claim, 0.0, 0.0, 0.0, cfg);
        CHECK(anti.std_error * anti.std_error < plain.std_error * plain.std_error);
        CHECK(std::fabs(anti.estimate - oracle::bs_call(1.0, 1.0, 0.2, 0.5)) < 3.0 * anti.std_error);
    }
    SUBCASE("Heston put at the reference parameters") {
        auto cfg = config(100'000, 100);
        const Claim claim{Payoff::put(kX), {}, kT};
        const auto plain = simulate_price(kHeston, kRho, claim, 0.0, kX, kY, cfg);
        cfg.antithetic = true;
        const auto anti = simulate_price(kHeston, kRho, claim, 0.0, kX, kY, cfg);
        CHECK(anti.std_error <= 0.9 * plain.std_error);
    }
    SUBCASE("constant payoff has zero variance both ways") {
        auto cfg = config(10'000, 5);
        const Claim claim{Payoff::digital(-1e3), {}, kT};
        CHECK(simulate_price(kHeston, kRho, claim, 0.0, kX, kY, cfg).std_error == 0.0);
        cfg.antithetic = true;
        const auto r = simulate_price(kHeston, kRho, claim, 0.0, kX, kY, cfg);
        CHECK(r.std_error == 0.0);
        CHECK(r.estimate == 1.0);
    }
    SUBCASE("odd path counts are rejected") {
        auto cfg = config(1001, 5);
        cfg.antithetic = true;
        CHECK_THROWS_AS(simulate_price(Gbm{0.2}, 0.0, {Payoff::call(0.0), {}, 0.5}, 0.0, 0.0, 0.0, cfg),
                        InvalidArgument);
    }
}

TEST_CASE("results are identical across workers and kernel sets") {
    std::vector<McTarget> t = {{Payoff::call(kX), Interval::between(0.0, 0.66), false},
                               {Payoff::put(kX), Interval::between(0.55, 1.0), false},
                               {Payoff::put(kX), {}, false}};
    auto cfg = config(10'000, 60);  // several blocks plus a partial one
    auto run = [&](const char* threads, simd::Isa isa) {
        setenv("LSV_THREADS", threads, 1);
        cfg.isa = isa;
        auto r = simulate_claims(kHeston, kRho, 0.0, kX, kY, kT, t, cfg);
        unsetenv("LSV_THREADS");
        return r;
    };
    const auto a = run("1", simd::Isa::scalar);
    const auto b = run("3", simd::Isa::scalar);
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(a[i].estimate == b[i].estimate);
        CHECK(a[i].std_error == b[i].std_error);
    }
    if (simd::cpu_has_avx2() && simd::avx2_kernels()) {
        const auto c = run("2", simd::Isa::avx2);
        for (std::size_t i = 0; i < t.size(); ++i) {
            CHECK(a[i].estimate == c[i].estimate);
            CHECK(a[i].knocked_out_fraction == c[i].knocked_out_fraction);
        }
    }
    cfg.seed += 1;
    cfg.isa.reset();
    CHECK(simulate_claims(kHeston, kRho, 0.0, kX, kY, kT, t, cfg)[0].estimate != a[0].estimate);
}

TEST_CASE("invalid requests") {
    const Claim claim{Payoff::call(0.0), {}, 0.5};
    CHECK_THROWS_AS(simulate_price(Tabulated{}, 0.0, claim, 0.0, 0.0, 0.0, config(10, 1)), InvalidArgument);
    CHECK_THROWS_AS(simulate_price(Gbm{0.2}, 0.0, claim, 0.0, 0.0, 0.0, config(0, 1)), InvalidArgument);
    CHECK_THROWS_AS(simulate_price(Gbm{0.2}, 0.0, claim, 0.0, 0.0, 0.0, config(10, 0)), InvalidArgument);
    CHECK_THROWS_AS(simulate_price(Gbm{0.2}, 0.0, claim, 0.6, 0.0, 0.0, config(10, 1)), InvalidArgument);
    auto cfg = config(10, 1);
    cfg.confidence = 1.0;
    CHECK_THROWS_AS(simulate_price(Gbm{0.2}, 0.0, claim, 0.0, 0.0, 0.0, cfg), InvalidArgument);
    cfg = config(10, 1);
    cfg.scheme = McScheme::full_truncation_euler;
    CHECK_THROWS_AS(simulate_price(Gbm{0.2}, 0.0, claim, 0.0, 0.0, 0.0, cfg), InvalidArgument);
    CHECK(mc_scheme_from_string("log-euler") == McScheme::log_euler);
    CHECK_THROWS_AS(mc_scheme_from_string("milstein"), InvalidArgument);
    CHECK(default_scheme(kHeston) == McScheme::full_truncation_euler);
}
