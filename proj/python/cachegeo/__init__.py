"""Probabilistic caching in wireless helper networks: analytics, optimizers and Monte Carlo."""

from ._core import (
    Baseline,
    CachingPolicy,
    ConfigError,
    ContentLibrary,
    Estimate,
    InterferenceConstants,
    InterferenceReport,
    NetworkParams,
    NumericFailure,
    SimulationOptions,
    SolveReport,
    __version__,
    baseline_policy,
    build_and_sample,
    constant_rates,
    evaluate,
    interference_constants,
    kappa,
    list_figures,
    load_based_c,
    make_library,
    mean_load_m1,
    nakagami_lower_bound,
    optimize_interference,
    optimize_noise,
    policy_spread,
    rayleigh_lower_bound,
    run,
    sample_xi_min,
    simulate_interference,
    simulate_noise_limited,
    success_noise,
    uniform_rates,
    xi1_cdf,
    zipf_popularity,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
