#pragma once

#include <memory>
#include <vector>

#include "sddpde/history.hpp"
#include "sddpde/spectral.hpp"

namespace sddpde {

/// Smooth convolution profile f for the non-local operator.
struct KernelProfile {
    enum class Kind { Gaussian, Constant };
    Kind kind = Kind::Gaussian;
    double sigma = 0.6;   // gaussian: f(z) = exp(-z^2 / sigma^2)
    double value = 1.0;   // constant: f(z) = value

    double operator()(double z) const;
};

/// Compactly supported bump weight: ell(x) = (1 - ((x-c)/w)^2)^power inside
/// |x - c| < w, zero outside. power >= 2 makes ell and ell' vanish at the
/// support boundary; the support must lie strictly inside (0, length).
struct BumpWeight {
    double center = 0.0;
    double width = 0.0;
    int power = 2;

    double operator()(double x) const;
    double derivative(double x) const;
};

struct KernelSpec {
    KernelProfile f;
    BumpWeight ell;
    int quad_points = 0;        // per-direction tensor quadrature resolution
    bool verify_resolution = true;  // doubling-drift check on assembly
};

/// Galerkin matrix of the convolution operator plus its Lipschitz constant
/// L_B in the sense ||B v|| <= L_B ||A^{-1/2} v||.
struct NonlocalOperator {
    int m = 0;
    std::vector<double> matrix;  // m x m, row-major: (Bv)_j = sum_k matrix[j*m+k] v_k
    double L_B = 0.0;

    CoeffVec apply(const CoeffVec& v) const;
};

struct PointwiseNonlinearity {
    enum class Kind { Nicholson, SaturatingLinear, Constant };
    Kind kind = Kind::Nicholson;
    double p = 1.0;      // nicholson birth rate: b(w) = p * w * exp(-|w|)
    double slope = 1.0;  // saturating_linear: b(w) = cap * tanh(slope * w / cap)
    double cap = 1.0;
    double value = 0.0;  // constant
    double M_b = 0.0;    // sup bound
    double L_b = 0.0;    // Lipschitz constant

    double operator()(double w) const;

    static PointwiseNonlinearity nicholson(double p);
    static PointwiseNonlinearity saturating_linear(double slope, double cap);
    static PointwiseNonlinearity constant(double value);
};

/// Discrete delay functional eta : history -> [0, r].
///
/// history_energy: eta(phi) = r * s(kappa * I(phi)) with s(z) = z / (1 + z)
/// and I(phi) = integral over [-r, 0] of ||A^{-1/2} phi||^2. Its Lipschitz
/// constant in the metric (integral ||A^{-1/2}(phi - psi)||^2)^{1/2} is the
/// global gradient bound of z -> r*s(kappa*z^2) on the history Hilbert space:
/// sup_t 2*kappa*r*t / (1 + kappa*t^2)^2 = (3*sqrt(3)/8) * r * sqrt(kappa),
/// attained at t = 1/sqrt(3*kappa); hence q = 0.
struct DelayFunctional {
    enum class Kind { Constant, HistoryEnergy };
    Kind kind = Kind::Constant;
    double r = 1.0;
    double tau0 = 0.0;   // constant delay value
    double kappa = 1.0;  // history_energy gain
    double L_eta = 0.0;
    double q = 0.0;

    static DelayFunctional constant(double tau0, double r);
    static DelayFunctional history_energy(double kappa, double r);
};

/// Assembled right-hand side F1(u_t) = b([B u(t - eta(u_t))]) in Galerkin
/// coordinates, with linear damping d kept alongside.
struct SddRightHandSide {
    std::shared_ptr<const SpectralBasis> basis;
    NonlocalOperator B;
    PointwiseNonlinearity b;
    DelayFunctional eta;
    double d = 0.0;
};

NonlocalOperator assemble_B(const KernelSpec& spec, const SpectralBasis& basis);

double eval_eta(const DelayFunctional& eta, const SpectralBasis& basis, const History& h);

/// P_m F1(u_t): delayed lookup, non-local matrix, pointwise b on the grid,
/// projection back to coefficients.
CoeffVec eval_F1(const SddRightHandSide& rhs, const History& h);

/// L_{F1}[ell] = L_b * L_B * sqrt(2) * max{1, ell * L_eta * max{1, sqrt(r)}}.
double lipschitz_F1(const SddRightHandSide& rhs, double ell);

/// integral over the window of ||A^{-1/2} phi(theta)||^2 (exact per-piece
/// Gauss-Legendre; the integrand is a degree-6 polynomial on each piece).
double history_energy_integral(const SpectralBasis& basis, const History& h);

/// Scenario physics: everything needed to assemble (basis, rhs) at a given
/// Galerkin order. Used by the CLI and by order-sweep studies.
struct ModelSpec {
    DomainSpec domain;
    int m = 1;
    KernelSpec kernel;
    PointwiseNonlinearity b;
    DelayFunctional eta;
    double d = 0.0;
};

SddRightHandSide assemble_model(const ModelSpec& spec);

}  // namespace sddpde
