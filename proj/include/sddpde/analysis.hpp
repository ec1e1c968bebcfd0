#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sddpde/integrator.hpp"
#include "sddpde/sdd_rhs.hpp"

namespace sddpde {

/// Per-inequality verification record. margin = bound - observed; the check
/// passes iff margin >= -tol.
struct EstimateReport {
    std::string id;
    double bound = 0.0;
    double observed = 0.0;
    double margin = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::string note;
    std::vector<std::pair<std::string, double>> details;

    void finish() {
        margin = bound - observed;
        pass = margin >= -tol;
    }
};

/// Discrete energy inequality along a trajectory:
/// ||A^{1/2}u(t)||^2 + int_0^t ||Au||^2 <= ||A^{1/2}u(0)||^2 + M_b^2 |Omega| t
/// with slack tol_E(t) = 1e-6 (1 + t); the time integral uses the trapezoid
/// rule on the step grid.
EstimateReport verify_energy(const Trajectory& traj, const SddRightHandSide& rhs);

/// Gronwall continuous-dependence bounds for two runs started at phi, psi:
/// the H-norm bound with E = exp{L_F1[L_v] (T + sqrt(2T/e))} and the
/// Lipschitz-space bound with the extra factor (2 + d + L_F1). Both solution
/// labelings are evaluated; the smaller bound is the one checked.
std::vector<EstimateReport> verify_continuous_dependence(const HistoryBuffer& phi,
                                                         const HistoryBuffer& psi,
                                                         const SddRightHandSide& rhs,
                                                         const SolverConfig& cfg);

/// ||A^{1/2}u||^2 threshold of the absorbing ball, M_b^2 |Omega| / lambda_1.
double absorbing_threshold(const SddRightHandSide& rhs);

/// Entry time of the comparison ODE y' = -lambda_1 y + M_b^2 |Omega| into the
/// (1 + epsilon) ball, starting from y0.
double comparison_entry_time(const SddRightHandSide& rhs, double y0, double epsilon);

struct DissipativityEntry {
    double entry_time = -1.0;     // < 0: never certified inside for duration r
    double predicted = 0.0;       // comparison-ODE entry prediction
    std::string status;           // "entered" | "budget_exhausted" | "no_entry"
};

/// Integrate each initial segment until it enters the (1 + epsilon) absorbing
/// ball and stays inside for one full delay span r. Requires q = 0.
EstimateReport verify_dissipativity(const SddRightHandSide& rhs, const SolverConfig& cfg,
                                    const std::vector<HistoryBuffer>& initials, double epsilon,
                                    double t_max,
                                    std::vector<DissipativityEntry>* entries = nullptr);

struct GalerkinRow {
    int m_coarse = 0, m_fine = 0;
    double dist = 0.0;       // H distance, coarse run zero-padded into the fine frame
    double dist_projected = 0.0;  // same restricted to the first m_coarse modes
};

/// Cauchy differences between consecutive Galerkin orders. All runs share one
/// grid (n_grid = max(spec, 2 * m_max)) so differences reflect mode
/// truncation, not quadrature drift. Window maxima are taken on step nodes.
std::vector<GalerkinRow> galerkin_convergence_study(const InitialFunction& shape,
                                                    const ModelSpec& model,
                                                    const std::vector<int>& m_list,
                                                    const SolverConfig& cfg);

/// Scalar time-shift limits (m = 1 on (0, pi), so the A^{+-1/2} weights drop
/// out): the kinked ramp has Lipschitz-norm shift limit 1, its derivative has
/// sup-norm shift limit 1, and a smooth quadratic control has limit 0. Each
/// limit is the 3-point Richardson value at h -> 0 over h = 0.1, 0.01, 0.001.
double timeshift_counterexample();
double timeshift_derivative_counterexample();
double timeshift_smooth_control();

/// Randomized audit of the delayed-nonlinearity Lipschitz estimate
/// ||F1(phi) - F1(psi)|| <= L_F1[|||phi|||] (q ||A^{1/2}(phi(0)-psi(0))|| +
/// ||A^{-1/2}(phi-psi)||_C); reports the worst observed/bound ratio.
EstimateReport audit_lemma1(const SddRightHandSide& rhs, int n_samples, std::uint64_t seed);
/// ||B w|| <= L_B ||A^{-1/2} w|| on random coefficient vectors.
EstimateReport audit_hb(const SddRightHandSide& rhs, int n_samples, std::uint64_t seed);
/// |eta(phi) - eta(psi)| <= L_eta (q ||A^{1/2}(phi(0)-psi(0))||^2 +
/// int ||A^{-1/2}(phi-psi)||^2)^{1/2} on random history pairs.
EstimateReport audit_h1eta(const SddRightHandSide& rhs, int n_samples, std::uint64_t seed);
/// ||F1(u_t)|| <= M_b |Omega|^{1/2} on random histories.
EstimateReport audit_f1_bound(const SddRightHandSide& rhs, int n_samples, std::uint64_t seed);

/// Start on the compatible manifold, track the compatibility residual at
/// off-node sample times on [0, t_end], and require it to shrink >= 3x under
/// dt halving.
EstimateReport verify_manifold_invariance(const InitialFunction& shape,
                                          const SddRightHandSide& rhs, const SolverConfig& cfg,
                                          double t_end);

/// Two-stage vs one-stage runs: snapshot(t + s) of one run against
/// solve(snapshot(t), s), H-distance <= tol for random grid-aligned (t, s).
EstimateReport verify_semigroup(const HistoryBuffer& initial, const SddRightHandSide& rhs,
                                const SolverConfig& cfg, int n_pairs, std::uint64_t seed,
                                double tol = 1e-8);

/// Random C^1 trig shape with 1/k amplitude decay; used by audits and sweeps.
InitialFunction random_trig_shape(int m, double r, std::mt19937_64& rng, double amplitude);

/// Add a C^1 hat-squared bump along one eigenmode, supported on [-rho, 0] and
/// peaking at theta = 0, scaled so the H-norm of the perturbation is h_norm.
HistoryBuffer add_mode_bump_perturbation(const SpectralBasis& basis, const HistoryBuffer& buf,
                                         int mode, double h_norm, double rho);

/// Random C^1 initial segments rescaled so ||A^{1/2} phi(0)||^2 = target_y0.
std::vector<HistoryBuffer> dissipativity_initials(const SddRightHandSide& rhs, int count,
                                                  double target_y0, std::uint64_t seed);

/// Rescale/extend a shape to a different Galerkin order (zero-padding
/// polynomial coefficients; trig shapes must fit in the target order).
InitialFunction retarget_shape(const InitialFunction& shape, int m);

/// max over a shared sample grid of ||A^{-1/2}(a - b)|| plus
/// ||A^{1/2}(a - b)(anchor)||; both buffers must share the window.
double buffer_h_distance(const SpectralBasis& basis, const HistoryBuffer& a,
                         const HistoryBuffer& b);

}  // namespace sddpde
