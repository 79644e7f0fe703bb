#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "lsv/error.hpp"
#include "lsv/kernels.hpp"
#include "lsv/mc.hpp"
#include "lsv/pricer.hpp"
#include "lsv/selftest.hpp"
#include "lsv/simd.hpp"

namespace lsv::cli {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Strict reader for one JSON object: every key must be consumed, or finish()
// reports it as unknown.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    double num(const std::string& key) {
        if (!has(key)) throw ConfigError(where(key) + " is required");
        const json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
        return v.get<double>();
    }
    double num(const std::string& key, double fallback) { return has(key) ? num(key) : fallback; }

    long long integer(const std::string& key, long long fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long long>();
        // 1e7 is a convenient way to write a path count.
        if (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()) && std::abs(v.get<double>()) < 9e15)
            return static_cast<long long>(v.get<double>());
        throw ConfigError(where(key) + " must be an integer");
    }

    bool flag(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        if (!j_.at(key).is_boolean()) throw ConfigError(where(key) + " must be true or false");
        return j_.at(key).get<bool>();
    }

    std::string str(const std::string& key) {
        if (!has(key)) throw ConfigError(where(key) + " is required");
        if (!j_.at(key).is_string()) throw ConfigError(where(key) + " must be a string");
        return j_.at(key).get<std::string>();
    }
    std::string str(const std::string& key, const std::string& fallback) { return has(key) ? str(key) : fallback; }

    const json& raw(const std::string& key) {
        if (!has(key)) throw ConfigError(where(key) + " is required");
        return j_.at(key);
    }

    std::string where(const std::string& key = "") const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.count(key)) throw ConfigError("unknown key '" + where(key) + "'");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json opt_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------------------
// Config -> library types

struct ModelBlock {
    BuiltinModel model;
    double rho = 0.0;
    json resolved;
};

std::vector<std::vector<double>> triangle(const json& j, const std::string& where, int max_order) {
    if (!j.is_array() || static_cast<int>(j.size()) != max_order + 1)
        throw ConfigError(where + " must list orders 0.." + std::to_string(max_order));
    std::vector<std::vector<double>> t;
    for (std::size_t n = 0; n < j.size(); ++n) {
        if (!j[n].is_array() || j[n].size() != n + 1)
            throw ConfigError(where + "[" + std::to_string(n) + "] must hold " + std::to_string(n + 1) + " numbers");
        std::vector<double> row;
        for (const auto& v : j[n]) {
            if (!v.is_number()) throw ConfigError(where + " entries must be numbers");
            row.push_back(v.get<double>());
        }
        t.push_back(std::move(row));
    }
    return t;
}

ModelBlock parse_model(const json& j) {
    Obj o(j, "model");
    ModelBlock m;
    const std::string type = o.str("type");
    m.rho = o.num("rho", 0.0);
    m.resolved = {{"type", type}, {"rho", m.rho}};
    if (type == "heston") {
        Heston h{o.num("kappa"), o.num("theta"), o.num("delta")};
        m.model = h;
        m.resolved.update({{"kappa", h.kappa}, {"theta", h.theta}, {"delta", h.delta}});
    } else if (type == "cev") {
        Cev c{o.num("sigma"), o.num("gamma")};
        m.model = c;
        m.resolved.update({{"sigma", c.sigma}, {"gamma", c.gamma}});
    } else if (type == "gbm") {
        Gbm g{o.num("sigma")};
        m.model = g;
        m.resolved["sigma"] = g.sigma;
    } else if (type == "tabulated") {
        Tabulated t;
        const std::string f = o.str("f", "exponential");
        if (f == "exponential") t.f_kind = FKind::exponential;
        else if (f == "identity") t.f_kind = FKind::identity;
        else throw ConfigError("model.f must be exponential or identity");
        t.max_order = static_cast<int>(o.integer("max_order", 2));
        if (t.max_order < 0) throw ConfigError("model.max_order must be non-negative");
        const json& pts = o.raw("points");
        if (!pts.is_array() || pts.empty()) throw ConfigError("model.points must be a non-empty array");
        static const char* names[4] = {"half_sigma_sq", "c", "half_g_sq", "sigma_g"};
        for (std::size_t p = 0; p < pts.size(); ++p) {
            Obj po(pts[p], "model.points[" + std::to_string(p) + "]");
            Tabulated::Point pt;
            pt.x = po.num("x");
            pt.y = po.num("y", 0.0);
            for (int c = 0; c < 4; ++c)
                pt.partials[c] = triangle(po.raw(names[c]), po.where(names[c]), t.max_order);
            po.finish();
            t.points.push_back(std::move(pt));
        }
        m.resolved.update({{"f", f}, {"max_order", t.max_order}, {"points", pts}});
        m.model = std::move(t);
    } else {
        throw ConfigError("model.type must be heston, cev, gbm or tabulated, got '" + type + "'");
    }
    o.finish();
    return m;
}

struct ClaimBlock {
    Claim claim;
    json resolved;
};

ClaimBlock parse_claim(const json& j, FKind f) {
    Obj o(j, "claim");
    ClaimBlock c;
    const std::string kind = o.str("payoff");
    c.resolved["payoff"] = kind;
    if (kind == "table") {
        const json& nodes = o.raw("table");
        std::vector<std::pair<double, double>> pts;
        if (!nodes.is_array()) throw ConfigError("claim.table must be an array of [x, value] pairs");
        for (const auto& n : nodes) {
            if (!n.is_array() || n.size() != 2 || !n[0].is_number() || !n[1].is_number())
                throw ConfigError("claim.table must be an array of [x, value] pairs");
            pts.emplace_back(n[0].get<double>(), n[1].get<double>());
        }
        c.claim.payoff = Payoff::table(pts);
        c.resolved["table"] = nodes;
    } else {
        // Log strike: the asset strike is e^K.
        const double K = o.num("K");
        if (kind == "call") c.claim.payoff = Payoff::call(K, f);
        else if (kind == "put") c.claim.payoff = Payoff::put(K, f);
        else if (kind == "digital") c.claim.payoff = Payoff::digital(K);
        else throw ConfigError("claim.payoff must be call, put, digital or table, got '" + kind + "'");
        c.resolved["K"] = K;
    }
    c.claim.T = o.num("T");
    const double L = o.num("L", -inf), U = o.num("U", inf);
    if (std::isfinite(L) && std::isfinite(U)) c.claim.barriers = Interval::between(L, U);
    else c.claim.barriers = Interval{L, U};
    c.claim.knock_in = o.flag("knock_in", false);
    c.resolved.update({{"T", c.claim.T}, {"L", opt_number(L)}, {"U", opt_number(U)}, {"knock_in", c.claim.knock_in}});
    o.finish();
    return c;
}

Numerics parse_numerics(const json& j, json& resolved) {
    Numerics n;
    if (!j.is_null()) {
        Obj o(j, "numerics");
        n.quad_tol = o.num("quad_tol", n.quad_tol);
        n.tail_tol = o.num("tail_tol", n.tail_tol);
        n.confluence_sep = o.num("confluence_sep", n.confluence_sep);
        n.max_modes = static_cast<int>(o.integer("max_modes", n.max_modes));
        n.inner_mode_factor = o.num("inner_mode_factor", n.inner_mode_factor);
        n.far_barrier_tol = o.num("far_barrier_tol", n.far_barrier_tol);
        n.native_halfline = o.flag("native_halfline", n.native_halfline);
        o.finish();
    }
    resolved = {{"quad_tol", n.quad_tol},       {"tail_tol", n.tail_tol},
                {"confluence_sep", n.confluence_sep}, {"max_modes", n.max_modes},
                {"inner_mode_factor", n.inner_mode_factor}, {"far_barrier_tol", n.far_barrier_tol},
                {"native_halfline", n.native_halfline}};
    return n;
}

McConfig parse_mc(const json& j, const BuiltinModel& model, std::uint64_t seed, bool& enabled, json& resolved) {
    McConfig mc;
    mc.seed = seed;
    enabled = false;
    std::string scheme = "auto", isa = "auto";
    if (!j.is_null()) {
        Obj o(j, "mc");
        enabled = o.flag("enabled", false);
        const long long paths = o.integer("n_paths", static_cast<long long>(mc.n_paths));
        if (paths <= 0) throw ConfigError("mc.n_paths must be positive");
        mc.n_paths = static_cast<std::size_t>(paths);
        mc.n_steps = static_cast<int>(o.integer("n_steps", mc.n_steps));
        scheme = o.str("scheme", scheme);
        mc.bridge_correction = o.flag("bridge_correction", mc.bridge_correction);
        mc.confidence = o.num("confidence", mc.confidence);
        mc.antithetic = o.flag("antithetic", mc.antithetic);
        isa = o.str("isa", isa);
        o.finish();
    }
    if (scheme != "auto") mc.scheme = mc_scheme_from_string(scheme);
    if (isa == "scalar") mc.isa = simd::Isa::scalar;
    else if (isa == "avx2") {
        if (!simd::avx2_kernels() || !simd::cpu_has_avx2()) throw ConfigError("mc.isa avx2 is not available here");
        mc.isa = simd::Isa::avx2;
    } else if (isa != "auto") throw ConfigError("mc.isa must be auto, scalar or avx2");
    // Record what will actually run so the metadata describes the run.
    const bool tabulated = std::holds_alternative<Tabulated>(model);
    const std::string scheme_used = mc.scheme ? to_string(*mc.scheme) : tabulated ? "none" : to_string(default_scheme(model));
    const simd::Isa isa_used = mc.isa.value_or(simd::active_isa());
    resolved = {{"enabled", enabled},
                {"n_paths", mc.n_paths},
                {"n_steps", mc.n_steps},
                {"scheme", scheme_used == "none" ? "auto" : scheme_used},
                {"bridge_correction", mc.bridge_correction},
                {"confidence", mc.confidence},
                {"antithetic", mc.antithetic},
                {"isa", simd::to_string(isa_used)}};
    if (enabled) validate(mc);
    return mc;
}

struct Job {
    std::string command;
    BuiltinModel model;
    PriceRequest req;
    McConfig mc;
    bool mc_enabled = false;
    SweepAxis axis = SweepAxis::U;
    std::vector<double> grid;
    std::string output = "-";
    json resolved;
};

Job build_job(const json& config, const std::string& command) {
    Obj o(config, "");
    if (o.has("command") && o.str("command") != command)
        throw ConfigError("config was written for '" + o.str("command") + "', not '" + command + "'");

    ModelBlock mb = parse_model(o.raw("model"));
    const FKind f = std::holds_alternative<Tabulated>(mb.model) ? std::get<Tabulated>(mb.model).f_kind : FKind::exponential;

    Obj st(o.raw("state"), "state");
    const double t = st.num("t", 0.0);
    const double x = st.num("x");
    const double y = std::holds_alternative<Heston>(mb.model) ? st.num("y") : st.num("y", 0.0);
    st.finish();

    ClaimBlock cb = parse_claim(o.raw("claim"), f);
    const int order = static_cast<int>(o.integer("order", 2));

    json numerics_json, mc_json;
    const Numerics numerics = parse_numerics(o.has("numerics") ? o.raw("numerics") : json(), numerics_json);
    const long long seed = o.integer("seed", 1);
    if (seed < 0) throw ConfigError("seed must be non-negative");
    bool mc_enabled = false;
    const McConfig mc = parse_mc(o.has("mc") ? o.raw("mc") : json(), mb.model, static_cast<std::uint64_t>(seed),
                                 mc_enabled, mc_json);
    const std::string output = o.str("output", "-");

    json resolved = {{"command", command},
                     {"model", mb.resolved},
                     {"state", {{"t", t}, {"x", x}, {"y", y}}},
                     {"claim", cb.resolved},
                     {"order", order},
                     {"numerics", numerics_json},
                     {"mc", mc_json},
                     {"seed", seed},
                     {"output", output}};

    SweepAxis axis = SweepAxis::U;
    std::vector<double> grid;
    if (o.has("sweep")) {
        Obj sw(o.raw("sweep"), "sweep");
        axis = sweep_axis_from_string(sw.str("axis"));
        if (sw.has("values")) {
            if (sw.has("from") || sw.has("to") || sw.has("points"))
                throw ConfigError("sweep takes either values or from/to/points");
            const json& values = sw.raw("values");
            if (!values.is_array()) throw ConfigError("sweep.values must be an array");
            for (const auto& v : values) {
                if (!v.is_number()) throw ConfigError("sweep.values must be numbers");
                grid.push_back(v.get<double>());
            }
        } else {
            const double a = sw.num("from"), b = sw.num("to");
            const long long n = sw.integer("points", 15);
            if (n < 1) throw ConfigError("sweep.points must be positive");
            for (long long i = 0; i < n; ++i)
                grid.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
        }
        sw.finish();
        // The explicit grid is what the run used, so that is what gets recorded.
        resolved["sweep"] = {{"axis", to_string(axis)}, {"values", grid}};
    } else if (command == "sweep") {
        throw ConfigError("sweep is required for the sweep command");
    }
    o.finish();

    PriceRequest req{make_model(mb.model, mb.rho), cb.claim, t, x, y, order, numerics};
    validate(req);
    return Job{command, mb.model, std::move(req), mc, mc_enabled, axis, std::move(grid), output, std::move(resolved)};
}

// ---------------------------------------------------------------------------
// Output

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Csv {
public:
    explicit Csv(const std::string& path, std::ostream& fallback) {
        if (path == "-" || path.empty()) {
            os_ = &fallback;
        } else {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw ConfigError("cannot write '" + path + "'");
            os_ = file_.get();
        }
    }
    void meta(const json& config) { *os_ << "# meta: " << config.dump() << "\n"; }
    void comment(const std::string& tag, const json& j) { *os_ << "# " << tag << ": " << j.dump() << "\n"; }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) *os_ << (i ? "," : "") << cells[i];
        *os_ << "\n";
    }
    void finish() {
        os_->flush();
        if (!*os_) throw std::runtime_error("write failed");
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_ = nullptr;
};

McTarget target_of(const Claim& c) { return {c.payoff, c.barriers, c.knock_in}; }

Interval with_barrier(Interval b, SweepAxis axis, double v) {
    (axis == SweepAxis::L ? b.lower : b.upper) = v;
    return b.is_bounded() ? Interval::between(b.lower, b.upper) : b;
}

void run_price(const Job& job, std::ostream& out) {
    const PriceResult r = price(job.req);
    std::optional<McResult> mc;
    if (job.mc_enabled)
        mc = simulate_price(job.model, job.req.model.rho(), job.req.claim, job.req.t, job.req.x, job.req.y, job.mc);

    std::vector<std::string> head{"t", "x", "y", "N", "price", "imag_residual", "route", "modes", "chain_modes",
                                  "omega_max", "far_barrier"};
    std::vector<std::string> row{num(job.req.t), num(job.req.x), num(job.req.y), std::to_string(job.req.order),
                                 num(r.total), num(r.diagnostics.imag_residual), to_string(r.diagnostics.route),
                                 std::to_string(r.diagnostics.modes), std::to_string(r.diagnostics.chain_modes),
                                 num(r.diagnostics.omega_max),
                                 std::isnan(r.diagnostics.far_barrier) ? "" : num(r.diagnostics.far_barrier)};
    for (const auto& [nk, v] : r.contributions) {
        head.push_back("u_" + std::to_string(nk.first) + "_" + std::to_string(nk.second));
        row.push_back(num(v));
    }
    head.insert(head.end(), {"mc_price", "mc_stderr"});
    row.push_back(mc ? num(mc->estimate) : "");
    row.push_back(mc ? num(mc->std_error) : "");

    Csv csv(job.output, out);
    csv.meta(job.resolved);
    csv.row(head);
    csv.row(row);
    csv.finish();
}

void run_mc(const Job& job, std::ostream& out) {
    const McResult r = simulate_price(job.model, job.req.model.rho(), job.req.claim, job.req.t, job.req.x, job.req.y, job.mc);
    Csv csv(job.output, out);
    csv.meta(job.resolved);
    csv.row({"t", "x", "y", "T", "mc_price", "mc_stderr", "ci_low", "ci_high", "knocked_out_fraction", "n_paths"});
    csv.row({num(job.req.t), num(job.req.x), num(job.req.y), num(job.req.claim.T), num(r.estimate), num(r.std_error),
             num(r.ci_low), num(r.ci_high), num(r.knocked_out_fraction), std::to_string(r.n_paths)});
    csv.finish();
}

struct SweepTable {
    std::vector<double> value, u0, u2, mc, se;
};

SweepTable compute_sweep(const Job& job) {
    SweepTable t;
    const std::vector<SweepRow> rows = sweep(job.req, job.axis, job.grid);
    for (const auto& r : rows) {
        t.value.push_back(r.value);
        t.u0.push_back(r.u0);
        t.u2.push_back(r.uN);
    }
    if (job.mc_enabled) {
        // One set of paths for the whole grid, so neighbouring points share noise.
        std::vector<McTarget> targets;
        for (double v : job.grid) {
            McTarget tg = target_of(job.req.claim);
            tg.barriers = with_barrier(job.req.claim.barriers, job.axis, v);
            targets.push_back(tg);
        }
        const auto res = simulate_claims(job.model, job.req.model.rho(), job.req.t, job.req.x, job.req.y,
                                         job.req.claim.T, targets, job.mc);
        for (const auto& r : res) {
            t.mc.push_back(r.estimate);
            t.se.push_back(r.std_error);
        }
    }
    return t;
}

void write_sweep(const Job& job, const SweepTable& t, const std::string& path, std::ostream& out,
                 const json* figure = nullptr) {
    Csv csv(path, out);
    csv.meta(job.resolved);
    if (figure) csv.comment("figure", *figure);
    csv.row({"sweep_value", "u0", "u2", "mc_price", "mc_stderr", "err0", "err2"});
    const bool mc = !t.mc.empty();
    for (std::size_t i = 0; i < t.value.size(); ++i)
        csv.row({num(t.value[i]), num(t.u0[i]), num(t.u2[i]), mc ? num(t.mc[i]) : "", mc ? num(t.se[i]) : "",
                 mc ? num(t.mc[i] - t.u0[i]) : "", mc ? num(t.mc[i] - t.u2[i]) : ""});
    csv.finish();
}

int run_figures(const json& config, std::ostream& out, std::ostream& log) {
    Obj o(config, "");
    json base = json::object();
    for (const auto& [key, value] : config.items())
        if (key != "figures" && key != "output_dir") base[key] = value;
    const std::string dir = o.str("output_dir", "figures");
    const json& figs = o.raw("figures");
    if (!figs.is_array() || figs.empty()) throw ConfigError("figures must be a non-empty array");

    struct Plan {
        Job job;
        json figure;
        std::string key;
    };
    std::vector<Plan> plans;
    std::set<int> ids;
    for (std::size_t i = 0; i < figs.size(); ++i) {
        const std::string where = "figures[" + std::to_string(i) + "]";
        if (!figs[i].is_object()) throw ConfigError(where + " must be an object");
        json patch = figs[i];
        if (!patch.contains("id") || !patch["id"].is_number_integer()) throw ConfigError(where + ".id must be an integer");
        const int id = patch["id"].get<int>();
        if (!ids.insert(id).second) throw ConfigError("duplicate figure id " + std::to_string(id));
        const std::string q = patch.value("quantity", "");
        if (q != "error" && q != "price") throw ConfigError(where + ".quantity must be error or price");
        patch.erase("id");
        patch.erase("quantity");
        json merged = base;
        merged.merge_patch(patch);
        merged.erase("output");
        merged["command"] = "sweep";
        Job job = build_job(merged, "sweep");
        if (!job.mc_enabled) throw ConfigError(where + ": figures plot the simulated price, so mc.enabled must be true");
        job.output = (std::filesystem::path(dir) / ("fig" + std::to_string(id) + ".csv")).string();
        job.resolved["output"] = job.output;
        json key = job.resolved;
        key.erase("output");
        plans.push_back({std::move(job), {{"id", id}, {"quantity", q}}, key.dump()});
    }
    // Every other top-level key was checked by build_job on the merged config.

    std::filesystem::create_directories(dir);
    // Error and price figures of one study share a sweep; compute it once.
    std::map<std::string, SweepTable> done;
    for (const auto& p : plans) {
        auto it = done.find(p.key);
        if (it == done.end()) it = done.emplace(p.key, compute_sweep(p.job)).first;
        write_sweep(p.job, it->second, p.job.output, out, &p.figure);
        log << "wrote " << p.job.output << "\n";
    }
    return ok;
}

int run_selftest(const std::vector<std::string>& suites, double perturbation, std::ostream& out) {
    set_interval_C_perturbation(perturbation);
    const SelftestReport rep = selftest(suites);
    set_interval_C_perturbation(0.0);
    for (const auto& s : rep.suites) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s %-24s checks=%-5d failures=%-4d worst=%.3g time=%.2fs",
                      s.passed() ? "PASS" : "FAIL", s.name.c_str(), s.checks, s.failures, s.worst, s.seconds);
        out << buf << "\n";
        for (const auto& m : s.messages) out << "    " << m << "\n";
    }
    return rep.passed() ? ok : failure;
}

}  // namespace

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const std::string tag = "# meta: ";
    std::size_t pos = 0;
    while (pos < text.size() && text.compare(pos, tag.size(), tag) != 0) {
        if (text[pos] != '#') { pos = std::string::npos; break; }
        pos = text.find('\n', pos);
        if (pos != std::string::npos) ++pos;
    }
    try {
        if (pos != std::string::npos && pos < text.size()) {
            const std::size_t end = text.find('\n', pos);
            return json::parse(text.substr(pos + tag.size(), end == std::string::npos ? std::string::npos : end - pos - tag.size()));
        }
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
}

void apply_override(json& config, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &config;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError("bad key '" + key + "'");
        if (node->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(part);
            } catch (const std::exception&) {
                throw ConfigError("'" + part + "' in '" + key + "' must be an array index");
            }
            if (idx >= node->size()) throw ConfigError("index " + part + " out of range in '" + key + "'");
            node = &(*node)[idx];
        } else {
            if (node->is_null()) *node = json::object();
            if (!node->is_object()) throw ConfigError("'" + key + "' descends into a non-object");
            node = &(*node)[part];
        }
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    *node = value;
}

json resolve(const json& config, const std::string& command) { return build_job(config, command).resolved; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Asymptotic and Monte Carlo pricing of barrier claims under local-stochastic volatility", "lsv"};
    app.require_subcommand(1);

    std::string config_path, output;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    auto job_command = [&](const std::string& name, const std::string& help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", config_path, "JSON config, or a CSV written by this tool")->required();
        sub->add_option("--set", sets, "override: key.path=value (repeatable)");
        sub->add_option("--seed", seed, "Monte Carlo seed");
        sub->add_option("-o,--output", output, "output file ('-' for stdout)");
        return sub;
    };
    CLI::App* price_cmd = job_command("price", "price one claim");
    CLI::App* sweep_cmd = job_command("sweep", "price along a barrier grid");
    CLI::App* mc_cmd = job_command("mc", "Monte Carlo price of one claim");
    CLI::App* fig_cmd = job_command("figures", "write the eight figure CSVs");
    CLI::App* st_cmd = app.add_subcommand("selftest", "run the invariant suites");
    std::vector<std::string> suites;
    double perturbation = 0.0;
    st_cmd->add_option("--suite", suites, "suite to run (repeatable; default all)");
    st_cmd->add_option("--perturb-interval-c", perturbation, "relative error injected into interval_C");

    std::vector<std::string> argv_store{"lsv"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "ERROR " << config_error << ": " << e.what() << "\n";
        return config_error;
    }

    try {
        if (st_cmd->parsed()) {
            for (const auto& s : suites)
                if (std::find(selftest_suites().begin(), selftest_suites().end(), s) == selftest_suites().end())
                    throw ConfigError("unknown suite '" + s + "'");
            return run_selftest(suites, perturbation, out);
        }
        json config = load_config(config_path);
        for (const auto& s : sets) apply_override(config, s);
        if (seed) config["seed"] = *seed;
        if (!output.empty()) config[fig_cmd->parsed() ? "output_dir" : "output"] = output;

        if (fig_cmd->parsed()) return run_figures(config, out, err);
        const std::string command = price_cmd->parsed() ? "price" : sweep_cmd->parsed() ? "sweep" : "mc";
        const Job job = build_job(config, command);
        if (command == "price") run_price(job, out);
        else if (command == "sweep") write_sweep(job, compute_sweep(job), job.output, out);
        else run_mc(job, out);
        (void)mc_cmd;
        return ok;
    } catch (const ConfigError& e) {
        err << "ERROR " << config_error << ": " << e.what() << "\n";
        return config_error;
    } catch (const InvalidArgument& e) {
        err << "ERROR " << config_error << ": " << e.what() << "\n";
        return config_error;
    } catch (const ConvergenceError& e) {
        err << "ERROR " << no_convergence << ": " << e.what() << "\n";
        return no_convergence;
    } catch (const std::exception& e) {
        err << "ERROR " << failure << ": " << e.what() << "\n";
        return failure;
    }
}

}  // namespace lsv::cli
