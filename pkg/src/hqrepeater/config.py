"""Numerical tolerances shared by every module.

All thresholds live in one frozen record so that tests, the CLI and the
oracle checks agree on what "equal" means.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class Tolerances:
    # fockcore
    coherent_tail: float = 1e-12
    projector: float = 1e-10
    trace: float = 1e-10
    hermitian: float = 1e-12
    psd: float = 1e-10
    quad_converge: float = 1e-11
    quad_nodes_start: int = 1000
    quad_nodes_max: int = 16000
    # dynamics
    norm: float = 1e-10
    cutoff_population: float = 1e-8
    singlet: float = 1e-12
    # channel
    kraus_defect: float = 1e-12
    # entgen
    xy_support: float = 0.05
    min_success: float = 1e-6
    # purify
    purify_norm: float = 1e-12
    # rates
    series_rel: float = 1e-15
    series_max_terms: int = 4_000_000

    def as_dict(self) -> dict:
        return asdict(self)


TOL = Tolerances()
