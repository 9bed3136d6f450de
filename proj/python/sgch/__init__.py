"""Spectral simulation lab for the stochastic generalized Camassa-Holm equation."""

from ._sgch import (
    InvalidInput,
    InvalidParameter,
    NoiseModel,
    PhiloxStream,
    SolverConfig,
    SpectralField,
    TimeProfile,
    TrajectoryRecord,
    cosine_field,
    decay_bound,
    derivative,
    drift,
    embedding_constant,
    exit_survival_bound,
    experiment_kinds,
    f_nonlocal,
    green_convolution,
    helmholtz_inverse,
    mollify_j,
    mollify_t,
    predicted_gap,
    rate_exponent,
    run_config,
    simulate_path,
    sobolev_norm,
    sup_norm,
    w1inf_norm,
)

__all__ = [name for name in dir() if not name.startswith("_")]
