"""Spectral Galerkin solver for a non-local reaction-diffusion equation with
a discrete state-dependent delay, plus numerical verifiers for its energy,
Lipschitz, and absorbing-set estimates."""

from ._core import (  # noqa: F401
    DEFAULT_SEED,
    ConfigError,
    DomainSpec,
    HistoryBuffer,
    InitialFunction,
    Scenario,
    SddRightHandSide,
    SolverConfig,
    SolverError,
    SpectralBasis,
    Trajectory,
    assemble_scenario,
    audit_lemma1,
    check_manifold,
    eval_F1,
    eval_eta,
    lipschitz_F1,
    lipschitz_seminorm,
    load_history_csv,
    load_scenario,
    make_manifold_initial,
    norm_c_minus_half,
    norm_h,
    norm_l,
    norm_x,
    parse_scenario,
    render_history,
    solve,
    timeshift_counterexample,
    timeshift_derivative_counterexample,
    timeshift_smooth_control,
    verify_energy,
    write_trajectory_csv,
)

__version__ = "0.1.0"
