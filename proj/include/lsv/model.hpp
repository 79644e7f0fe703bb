#pragma once

#include <array>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lsv {

/// Map from the state variable X to the traded asset S = f(X).
enum class FKind { exponential, identity };

/// The five generator coefficients served by a model.
enum class Chi { mu, half_sigma_sq, c, half_g_sq, sigma_g };

inline constexpr std::array<Chi, 5> all_chis{Chi::mu, Chi::half_sigma_sq, Chi::c,
                                             Chi::half_g_sq, Chi::sigma_g};

std::string to_string(Chi chi);
Chi chi_from_string(const std::string& name);
std::string to_string(FKind kind);

/// Open interval of admissible x values. Infinite ends are stored as +-inf.
struct Interval {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    static Interval whole_line() { return {}; }
    static Interval above(double L) { return {L, std::numeric_limits<double>::infinity()}; }
    static Interval below(double U) { return {-std::numeric_limits<double>::infinity(), U}; }
    static Interval between(double L, double U);

    bool has_lower() const noexcept { return lower > -std::numeric_limits<double>::infinity(); }
    bool has_upper() const noexcept { return upper < std::numeric_limits<double>::infinity(); }
    bool is_whole_line() const noexcept { return !has_lower() && !has_upper(); }
    bool is_bounded() const noexcept { return has_lower() && has_upper(); }
    bool contains(double x) const noexcept { return x > lower && x < upper; }
    bool contains(const Interval& other) const noexcept {
        return other.lower >= lower && other.upper <= upper;
    }
};

// ---------------------------------------------------------------------------
// Built-in models. The coefficients of the martingale drift are never stored:
// they follow from half_sigma_sq through drift_partials().

struct Heston {
    double kappa = 0.0;
    double theta = 0.0;
    double delta = 0.0;  // volatility of variance
};

struct Cev {
    double sigma = 0.0;
    double gamma = 1.0;
};

struct Gbm {
    double sigma = 0.0;
};

/// User supplied partial derivatives at a fixed set of expansion points.
/// `partials[chi][n][i]` holds d_x^i d_y^(n-i) chi at the point, for the four
/// non-drift coefficients; full triangles up to max_order are required.
struct Tabulated {
    struct Point {
        double x = 0.0;
        double y = 0.0;
        // index 0: half_sigma_sq, 1: c, 2: half_g_sq, 3: sigma_g
        std::array<std::vector<std::vector<double>>, 4> partials;
    };
    FKind f_kind = FKind::exponential;
    int max_order = 0;
    std::vector<Point> points;
};

using BuiltinModel = std::variant<Heston, Cev, Gbm, Tabulated>;

std::string model_name(const BuiltinModel& model);

/// Signature of a partial-derivative oracle: (chi, i, j, x, y) -> d_x^i d_y^j chi(x, y).
/// Only ever called with chi != Chi::mu.
using PartialOracle = std::function<double(Chi, int, int, double, double)>;

/// A local-stochastic volatility model: generator coefficients with partial
/// derivatives at any admissible point. Immutable once built.
class ModelSpec {
public:
    ModelSpec(FKind f_kind, double rho, int max_order, PartialOracle oracle,
              Interval domain = Interval::whole_line(), std::vector<std::string> warnings = {});

    FKind f_kind() const noexcept { return f_kind_; }
    double rho() const noexcept { return rho_; }
    int max_order() const noexcept { return max_order_; }
    const Interval& domain() const noexcept { return domain_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    /// d_x^i d_y^j chi at (x, y). Throws when i + j exceeds max_order().
    double partial(Chi chi, int i, int j, double x, double y) const;

    /// Same model with a different correlation.
    ModelSpec with_rho(double rho) const;

private:
    FKind f_kind_;
    double rho_;
    int max_order_;
    PartialOracle oracle_;
    Interval domain_;
    std::vector<std::string> warnings_;
};

/// Builds the generator view of a built-in model. Heston with 2*kappa*theta <
/// delta^2 is accepted with a warning recorded on the returned spec.
ModelSpec make_model(const BuiltinModel& model, double rho);

/// Drift partials implied by the martingale condition mu = -f'' sigma^2 / (2 f').
std::vector<double> drift_partials(FKind f_kind, std::span<const double> half_sigma_sq_partials);

struct TaylorEntry {
    int i = 0;  // power of (x - xbar)
    int j = 0;  // power of (y - ybar)
    double coefficient = 0.0;
};

/// Degree-n homogeneous Taylor term of chi about (xbar, ybar); always n + 1
/// entries ordered by increasing i.
std::vector<TaylorEntry> taylor_coeff(const ModelSpec& model, Chi chi, int n, double xbar,
                                      double ybar);

/// coeff * (x - xbar)^i (y - ybar)^j d_x^k d_y^l
struct Monomial {
    double coeff = 0.0;
    int i = 0;
    int j = 0;
    int k = 0;
    int l = 0;
};

/// A differential operator stored as a sum of monomials; zero monomials are dropped.
struct MultiIndexOp {
    std::vector<Monomial> terms;

    bool is_zero() const noexcept { return terms.empty(); }
    /// Coefficient of the monomial with the given indices, 0 if absent.
    double coefficient(int i, int j, int k, int l) const noexcept;
};

/// A_{n,0} (k = 0) or A_{n,1} (k = 1) about (xbar, ybar).
MultiIndexOp build_operator(const ModelSpec& model, int n, int k, double xbar, double ybar);

}  // namespace lsv
