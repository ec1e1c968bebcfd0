#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sddpde/history.hpp"
#include "sddpde/sdd_rhs.hpp"
#include "sddpde/spectral.hpp"

namespace sddpde {

struct SolverConfig {
    double dt = 1e-3;
    double T = 1.0;
    double fp_tol = 1e-10;  // fixed-point tolerance in ||A^{-1/2} .||
    int fp_max_iter = 50;
    int m = 0;  // 0 = take the basis order
};

struct StepStats {
    long long steps = 0;
    long long total_fp_iters = 0;
    int max_fp_iters = 0;
};

/// Computed solution on [t0, t0 + T]: states and ODE-consistent derivatives
/// on a uniform step grid, plus the initial segment for times below t0.
/// Node i satisfies gdot = -(lambda + d) g + F1(u_{t_i}) by construction.
class Trajectory {
  public:
    Trajectory(std::shared_ptr<const SpectralBasis> basis, HistoryBuffer initial, double dt);

    const SpectralBasis& basis() const { return *basis_; }
    std::shared_ptr<const SpectralBasis> basis_ptr() const { return basis_; }
    const HistoryBuffer& initial() const { return initial_; }
    double dt() const { return dt_; }
    double start_time() const { return initial_.anchor_time(); }
    double end_time() const { return node_time(n_nodes() - 1); }
    int n_nodes() const { return static_cast<int>(states_.size() / static_cast<size_t>(m_)); }
    double node_time(int i) const { return start_time() + dt_ * i; }

    const double* state_ptr(int i) const { return &states_[static_cast<size_t>(i) * m_]; }
    const double* deriv_ptr(int i) const { return &derivs_[static_cast<size_t>(i) * m_]; }
    CoeffVec state(int i) const;
    CoeffVec state_deriv(int i) const;

    /// Dense evaluation anywhere in [t0 - r, end]; cubic Hermite between nodes.
    void eval_state(double t, CoeffVec& out) const;
    void eval_state_deriv(double t, CoeffVec& out) const;

    /// Reconstruct u_t (the evolution semigroup S_{t - t0} applied to the
    /// initial segment). Exact: cubics restrict to cubics.
    HistoryBuffer snapshot(double t) const;

    /// integral over [a, b] of ||A^{-1/2} u(s)||^2 across the dense output,
    /// served from per-piece prefix sums in O(1) plus two partial pieces.
    double weighted_energy_integral(double a, double b) const;

    const StepStats& stats() const { return stats_; }
    double initial_manifold_residual() const { return initial_manifold_residual_; }

    void append_node(const CoeffVec& g, const CoeffVec& gd);
    void set_initial_manifold_residual(double v) { initial_manifold_residual_ = v; }
    StepStats& mutable_stats() { return stats_; }

  private:
    std::shared_ptr<const SpectralBasis> basis_;
    HistoryBuffer initial_;
    double dt_;
    int m_;
    std::vector<double> states_, derivs_;  // flat, node-major
    std::vector<double> init_energy_prefix_;  // per initial segment endpoint
    std::vector<double> energy_prefix_;       // per node
    StepStats stats_;
    double initial_manifold_residual_ = 0.0;
};

/// Seed a trajectory at the initial segment's anchor; node 0 carries the
/// ODE-consistent derivative.
Trajectory init_trajectory(const HistoryBuffer& initial, const SddRightHandSide& rhs,
                           const SolverConfig& cfg);

/// One exponential-trapezoidal step (exact diagonal propagation, endpoint
/// forcing weights phi_1 - phi_2 and phi_2) with dense-output delayed lookup.
/// A delayed time landing inside the new step is resolved by fixed-point
/// correction of the extrapolated segment.
void step(Trajectory& traj, const SddRightHandSide& rhs, const SolverConfig& cfg);

Trajectory solve(const HistoryBuffer& initial, const SddRightHandSide& rhs,
                 const SolverConfig& cfg);

/// ||A^{-1/2}(phi'(0) + A phi(0) + d phi(0) - F1(phi))||: zero exactly on the
/// compatible set of C^1 initial data.
double check_manifold(const HistoryBuffer& h, const SddRightHandSide& rhs);

/// Replace the endpoint derivative of the rendered shape by the compatible
/// one, blended C^1 over the final sub-segment of length min(r/8, 0.1), and
/// iterate until the compatibility residual drops below 1e-12.
HistoryBuffer make_manifold_initial(const InitialFunction& shape, const SddRightHandSide& rhs,
                                    int n_segments = 64);

}  // namespace sddpde
