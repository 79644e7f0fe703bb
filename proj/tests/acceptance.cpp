// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//   acceptance [--out DIR] [criterion numbers...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "lsv/kernels.hpp"
#include "lsv/pricer.hpp"
#include "lsv/selftest.hpp"
#include "oracles.hpp"

using namespace lsv;
namespace fs = std::filesystem;

namespace {

constexpr double kX = 0.62, kY = 0.04, kT = 0.083, kRho = -0.4;
const Heston kHeston{1.15, 0.04, 0.2};
const oracle::HestonParams kHp{1.15, 0.04, 0.2, kRho};

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

PriceRequest request(const BuiltinModel& m, double rho, Claim claim, double x, double y, int order) {
    return PriceRequest{make_model(m, rho), std::move(claim), 0.0, x, y, order, {}};
}

double contribution(const PriceResult& r, int n, int k) {
    const auto it = r.contributions.find({n, k});
    return it == r.contributions.end() ? 0.0 : it->second;
}

Outcome gbm_double_barrier() {
    const double sigma = 0.2, L = 0.4, U = 0.8, T = 0.25;
    const Claim claim{Payoff::call(kX), Interval::between(L, U), T};
    const double want = oracle::killed_gbm_price([](double y) { return std::max(std::exp(y) - std::exp(kX), 0.0); },
                                                 kX, sigma, T, L, U, {kX});
    const double u0 = price(request(Gbm{sigma}, 0.0, claim, kX, 0.0, 0)).total;
    const double u2 = price(request(Gbm{sigma}, 0.0, claim, kX, 0.0, 2)).total;
    const double e = std::fabs(u0 - want), d = std::fabs(u2 - u0);
    return {e < 1e-8 && d < 1e-12, fmt("|u0 - images| = %.2e (< 1e-8), |u2 - u0| = %.2e (< 1e-12)", e, d)};
}

Outcome merton_down_and_out() {
    const double sigma = 0.2, L = 0.5, T = 0.25;
    const Claim claim{Payoff::call(kX), Interval::above(L), T};
    const PriceResult r = price(request(Gbm{sigma}, 0.0, claim, kX, 0.0, 2));
    const double want = oracle::down_and_out_call(std::exp(kX), std::exp(kX), std::exp(L), sigma, T);
    const double e = std::fabs(r.total - want);
    return {e < 1e-6 && r.diagnostics.route == Route::far_barrier,
            fmt("route %s, price %.10f, reflection %.10f, |diff| = %.2e (< 1e-6)", to_string(r.diagnostics.route).c_str(),
                r.total, want, e)};
}

Outcome heston_european_put() {
    const PriceResult r = price(request(kHeston, kRho, {Payoff::put(kX), {}, kT}, kX, kY, 2));
    const double want = oracle::heston_put(kX, kY, kX, kHp, kT);
    const double e = std::fabs(r.total - want);
    return {e < 5e-4, fmt("u2 %.10f, characteristic function %.10f, |diff| = %.2e (< 5e-4); |u0 - cf| = %.2e", r.total,
                          want, e, std::fabs(contribution(r, 0, 0) - want))};
}

Outcome rate_in_maturity() {
    std::vector<double> xs, e0, e2;
    for (double tau : {0.02, 0.04, 0.08, 0.16}) {
        const PriceResult r = price(request(kHeston, kRho, {Payoff::put(kX), {}, tau}, kX, kY, 2));
        const double exact = oracle::heston_put(kX, kY, kX, kHp, tau);
        xs.push_back(std::log(tau));
        e0.push_back(std::log(std::fabs(exact - contribution(r, 0, 0))));
        e2.push_back(std::log(std::fabs(exact - r.total)));
    }
    auto slope = [&](const std::vector<double>& y) {
        double mx = 0, my = 0, sxy = 0, sxx = 0;
        for (std::size_t k = 0; k < y.size(); ++k) mx += xs[k] / 4, my += y[k] / 4;
        for (std::size_t k = 0; k < y.size(); ++k) sxy += (xs[k] - mx) * (y[k] - my), sxx += (xs[k] - mx) * (xs[k] - mx);
        return sxy / sxx;
    };
    const double s0 = slope(e0), s2 = slope(e2);
    return {s0 >= 0.7 && s2 >= s0 + 0.4,
            fmt("slope N=0 %.3f (>= 0.7), slope N=2 %.3f (>= N=0 + 0.4)", s0, s2)};
}

// Runs `lsv sweep` on an example config and applies the error-ordering property.
struct SweepCheck {
    int counted = 0, better = 0;
    std::string csv;
};

SweepCheck sweep_property(const std::string& config, const fs::path& out) {
    std::ostringstream o, e;
    const int code = cli::run({"sweep", "--config", config, "-o", out.string()}, o, e);
    if (code != 0) throw std::runtime_error("lsv sweep failed: " + e.str());
    std::ifstream in(out);
    SweepCheck c;
    c.csv = out.string();
    std::string line;
    std::getline(in, line);  // meta
    std::getline(in, line);  // header
    if (line != "sweep_value,u0,u2,mc_price,mc_stderr,err0,err2") throw std::runtime_error("unexpected header " + line);
    while (std::getline(in, line)) {
        std::vector<double> v;
        std::istringstream cells(line);
        for (std::string cell; std::getline(cells, cell, ',');) v.push_back(std::stod(cell));
        const double se = v[4], err0 = v[5], err2 = v[6];
        if (std::fabs(err0 - err2) > 3.0 * se) {
            ++c.counted;
            if (std::fabs(err2) < std::fabs(err0)) ++c.better;
        }
    }
    return c;
}

Outcome sweep_pair(const std::string& call_cfg, const std::string& put_cfg, const fs::path& dir, const std::string& tag) {
    fs::create_directories(dir);
    bool pass = true;
    std::string detail;
    for (const auto& [name, cfg] : {std::pair{"call", call_cfg}, std::pair{"put", put_cfg}}) {
        const SweepCheck c = sweep_property(cfg, dir / (tag + "_" + name + ".csv"));
        const bool ok = c.counted > 0 && c.better >= 0.8 * c.counted;
        pass = pass && ok;
        detail += fmt("%s%s: |err2| < |err0| at %d of %d resolved points", detail.empty() ? "" : "; ", name, c.better,
                      c.counted);
    }
    return {pass, detail + " (>= 80% each)"};
}

Outcome suite(const std::string& name) {
    const SuiteResult s = run_suite(name);
    return {s.passed(), fmt("%d checks, %d failures, worst error/tolerance %.3g", s.checks, s.failures, s.worst)};
}

Outcome all_suites() {
    const SelftestReport rep = selftest();
    std::string failed;
    int checks = 0;
    for (const auto& s : rep.suites) {
        checks += s.checks;
        if (!s.passed()) failed += " " + s.name;
    }
    // The suites must also notice a damaged coupling table.
    set_interval_C_perturbation(1e-3);
    const bool caught = !run_suite("orthonormality").passed() && !run_suite("kernel-coefficients").passed();
    set_interval_C_perturbation(0.0);
    std::string detail = fmt("%zu suites, %d checks", rep.suites.size(), checks);
    if (!failed.empty()) detail += ", failed:" + failed;
    detail += caught ? "; 1e-3 interval_C perturbation caught" : "; 1e-3 interval_C perturbation NOT caught";
    return {rep.passed() && caught, detail};
}

}  // namespace

int main(int argc, char** argv) {
    fs::path out = "acceptance_out";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--out" && i + 1 < argc) out = argv[++i];
        else only.insert(std::stoi(a));
    }
    const std::string cfg = LSV_CONFIG_DIR;

    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "GBM double barrier vs image series", 1, gbm_double_barrier},
        {2, "GBM down-and-out call vs reflection formula", 5, merton_down_and_out},
        {3, "Heston European put vs characteristic function", 5, heston_european_put},
        {4, "convergence rate in time to maturity", 30, rate_in_maturity},
        {5, "Heston sweeps: second order beats zeroth",  30 * 60,
         [&] { return sweep_pair(cfg + "/heston_call.json", cfg + "/heston_put.json", out, "heston"); }},
        {6, "CEV sweeps: second order beats zeroth", 20 * 60,
         [&] { return sweep_pair(cfg + "/cev_call.json", cfg + "/cev_put.json", out, "cev"); }},
        {7, "kernel coefficient suite", 60, [] { return suite("kernel-coefficients"); }},
        {8, "invariant suites", 120, all_suites},
    };

    bool all = true;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_s;
        const bool pass = o.pass && in_time;
        all = all && pass;
        std::cout << fmt("%s criterion %d: %s -- %s; %.2f s (budget %.0f s)%s", pass ? "PASS" : "FAIL", c.id, c.name,
                         o.detail.c_str(), secs, c.budget_s, in_time ? "" : " OVER BUDGET")
                  << std::endl;
    }
    return all ? 0 : 1;
}
