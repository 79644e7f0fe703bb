#pragma once

#include <complex>
#include <variant>
#include <vector>

#include "lsv/payoff.hpp"

namespace lsv {

using cplx = std::complex<double>;

/// Frozen drift b and half squared diffusion a of one sector.
struct Frozen {
    double b = 0.0;
    double a = 0.0;
};

/// Fourier modes psi_w = e^{i w x} / sqrt(2 pi) on the line.
struct FourierBasis {
    Frozen x;
    cplx eigenvalue(cplx w) const { return cplx(0.0, 1.0) * x.b * w - x.a * w * w; }
    cplx eigenfunction(cplx w, double z) const;
};

/// eta_w = sqrt(2/pi) e^{-b x/(2a)} sin(w (x - L)) on (L, inf), weight m = e^{b x / a}.
struct HalfLineBasis {
    double L = 0.0;
    Frozen x;
    double beta() const noexcept { return x.b / (2.0 * x.a); }
    double eigenvalue(double w) const { return -x.b * x.b / (4.0 * x.a) - x.a * w * w; }
    double eigenfunction(double w, double z) const;
    double weight(double z) const;
};

/// phi_l = sqrt(2/(U-L)) e^{-b x/(2a)} sin(pi l (x - L)/(U - L)) on (L, U).
struct IntervalBasis {
    double L = 0.0;
    double U = 1.0;
    Frozen x;
    double width() const noexcept { return U - L; }
    double beta() const noexcept { return x.b / (2.0 * x.a); }
    double frequency(int l) const noexcept;
    double eigenvalue(int l) const;
    double eigenfunction(int l, double z) const;
    double weight(double z) const;
};

using KernelBasis = std::variant<FourierBasis, HalfLineBasis, IntervalBasis>;

/// Throws unless a > 0 (and L < U for intervals).
void validate(const KernelBasis& basis);

/// d^k/dx^k [e^{-beta x} sin(w (x - L))] = e^{-beta x} (c_odd cos(.) + c_even sin(.)).
/// `normalization` is the basis constant multiplying both.
struct TrigDerivCoeffs {
    double c_odd = 0.0;
    double c_even = 1.0;
    double normalization = 1.0;
};

/// Raw coefficients (c_odd, c_even) = (Im, Re) of (-beta + i w)^k.
TrigDerivCoeffs deriv_coeffs(double beta, double w, int k);
TrigDerivCoeffs deriv_coeffs(const IntervalBasis& basis, int l, int k);
TrigDerivCoeffs deriv_coeffs(const HalfLineBasis& basis, double w, int k);

enum class TrigKind { sin_sin, sin_cos };

/// int_0^pi x^m sin(l' x) sin(l x) dx or int_0^pi x^m sin(l' x) cos(l x) dx.
double trig_moment(int m, int l_prime, int l, TrigKind kind);

/// Exact trig moment tables for m <= max_m and |p| <= max_p:
/// Ic(m, p) = int_0^pi x^m cos(p x) dx, Is(m, p) = int_0^pi x^m sin(p x) dx.
class TrigMoments {
public:
    TrigMoments(int max_m, int max_p);
    double cos_moment(int m, int p) const;
    double sin_moment(int m, int p) const;
    double value(int m, int l_prime, int l, TrigKind kind) const;
    int max_m() const noexcept { return max_m_; }
    int max_p() const noexcept { return max_p_; }

private:
    int max_m_, max_p_;
    std::vector<double> ic_, is_;
};

/// <phi_{l'}, (x - center)^i d^k phi_l>_m on the interval.
double interval_C(const IntervalBasis& basis, int l_prime, int l, int i, int k, double center = 0.0);

/// Relative perturbation applied to every interval_C value. Zero in normal
/// operation; the self-test uses it to confirm its suites detect corruption.
void set_interval_C_perturbation(double relative);
double interval_C_perturbation();

/// Dense table C[l' - 1][l - 1] for l', l = 1..modes.
class IntervalCTable {
public:
    IntervalCTable(const IntervalBasis& basis, int i, int k, double center, int modes);
    double operator()(int l_prime, int l) const {
        return data_[static_cast<std::size_t>(l_prime - 1) * modes_ + static_cast<std::size_t>(l - 1)];
    }
    int modes() const noexcept { return modes_; }
    const double* row(int l_prime) const { return data_.data() + static_cast<std::size_t>(l_prime - 1) * modes_; }

private:
    int modes_;
    std::vector<double> data_;
};

/// Half-line coupling <eta_{w'}, (x - center)^i d^k eta_w>_m split into its
/// distributional parts. With s_m = sin(m pi/2), c_m = cos(m pi/2), w_m = C(i,m)(L - center)^(i-m):
///   finite part:  sum_m fp[m] * fp (w' - w)^(-m-1)
///   delta part:   sum_m delta[m] * delta^(m)(w' - w)
///   regular part: `regular`, smooth for w, w' > 0.
struct HalfLineCoupling {
    std::vector<double> fp;
    std::vector<double> delta;
    double regular = 0.0;
};

HalfLineCoupling halfline_coupling(const HalfLineBasis& basis, double w_prime, double w, int i, int k,
                                   double center = 0.0);

/// Pointwise value of the coupling for w != w' (singular and regular parts, no delta terms).
double halfline_C(const HalfLineBasis& basis, double w_prime, double w, int i, int k, double center = 0.0);

// Payoff transforms ---------------------------------------------------------

/// (1/sqrt(2 pi)) int e^{-i w (x - xbar)} phi(x) dx, w complex inside the payoff strip.
cplx fourier_transform(const Payoff& phi, cplx w, double xbar);
/// <phi_l, phi>_m
double interval_transform(const IntervalBasis& basis, const Payoff& phi, int l);
/// <eta_w, phi>_m; throws DivergentTransform when the weighted integrand is not integrable.
double halfline_transform(const HalfLineBasis& basis, const Payoff& phi, double w);
/// Throws DivergentTransform when halfline_transform would diverge.
void check_halfline_transform(const HalfLineBasis& basis, const Payoff& phi);

}  // namespace lsv
