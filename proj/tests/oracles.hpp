#pragma once

// Test-only reference implementations, independent of the solver paths they
// check: composite Simpson quadrature, a classical method-of-steps DDE
// integrator with exact delayed lookup, and a dense-grid evaluation of the
// delayed non-local right-hand side with no spectral shortcuts.

#include <functional>
#include <vector>

#include "sddpde/history.hpp"
#include "sddpde/integrator.hpp"
#include "sddpde/sdd_rhs.hpp"
#include "sddpde/spectral.hpp"

namespace sddpde::testing {

double simpson(const std::function<double(double)>& f, double a, double b, int n_intervals);

/// Method-of-steps reference for a constant delay: classical RK4 on the
/// Galerkin system with cubic-Hermite delayed lookup from its own fine grid.
struct MosReference {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<CoeffVec> states;
    std::vector<CoeffVec> derivs;

    CoeffVec state_at(double t, const HistoryBuffer& initial) const;
};

MosReference method_of_steps_reference(const HistoryBuffer& initial,
                                       const SddRightHandSide& rhs, double T, double dt);

/// Dense-grid evaluation of the delayed non-local term: independent delay
/// quadrature, Simpson tensor quadrature for the convolution, Simpson
/// projections. Honors the same Galerkin truncation as the production path.
CoeffVec f1_fine_grid_oracle(const SddRightHandSide& rhs, const KernelSpec& kernel,
                             const HistoryBuffer& h, int n_fine);

/// Closed-form per-mode solution for constant forcing F_k:
/// g_k(t) = e^{-mu t} g0_k + F_k (1 - e^{-mu t}) / mu with mu = lambda_k + d.
CoeffVec constant_forcing_solution(const SpectralBasis& basis, double d, const CoeffVec& g0,
                                   const CoeffVec& forcing, double t);

}  // namespace sddpde::testing
