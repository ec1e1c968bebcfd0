#pragma once

#include <vector>

namespace sddpde {

/// Galerkin coordinates (g_1, ..., g_m) of a state in the eigenbasis.
using CoeffVec = std::vector<double>;
/// Point values at the interior quadrature nodes.
using GridVec = std::vector<double>;

/// Interval domain (0, length) with an equispaced interior node grid.
struct DomainSpec {
    double length = 0.0;
    int n_grid = 0;
};

/// Dirichlet eigenbasis of the negative Laplacian on (0, length).
///
/// Eigenpairs are analytic: lambda_k = (k*pi/length)^2 and
/// e_k(x) = sqrt(2/length) * sin(k*pi*x/length). The interior trapezoid
/// grid makes the discrete inner product of any two basis functions exact
/// (discrete sine orthogonality), so from_grid(to_grid(v)) == v to rounding
/// for every order m <= n_grid. Immutable after construction.
class SpectralBasis {
  public:
    SpectralBasis(const DomainSpec& domain, int m);

    int order() const { return m_; }
    const DomainSpec& domain() const { return domain_; }
    double length() const { return domain_.length; }
    int n_grid() const { return domain_.n_grid; }

    /// k is zero-based: eigenvalue(0) == lambda_1.
    double eigenvalue(int k) const { return eigenvalues_[static_cast<size_t>(k)]; }
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    const std::vector<double>& quad_nodes() const { return nodes_; }
    const std::vector<double>& quad_weights() const { return weights_; }

    /// Analytic evaluation of e_{k+1} at an arbitrary point.
    double eigenfunction(int k, double x) const;

    /// Diagonal fractional power: (lambda_k^alpha * g_k)_k, alpha in [-1, 1].
    CoeffVec apply_power(double alpha, const CoeffVec& v) const;

    GridVec to_grid(const CoeffVec& v) const;
    CoeffVec from_grid(const GridVec& w) const;

    /// sqrt(sum_k lambda_k^{2 alpha} g_k^2); alpha = 0 is the plain L2 norm.
    double norm_alpha(const CoeffVec& v, double alpha) const;

  private:
    DomainSpec domain_;
    int m_;
    std::vector<double> eigenvalues_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> node_matrix_;  // m x n_grid, row k = e_{k+1} at nodes
};

}  // namespace sddpde
