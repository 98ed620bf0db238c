"""Heralded entanglement generation between two cavity qubits.

Qubit A (ground state) interacts with a coherent field, the field crosses
the lossy link, interacts with qubit B (excited state) and is postselected
on the attenuated coherent state. The conditional two-qubit state is

    rho = [(1+x)|Psi-><Psi-| + (1-x)|Phi-><Phi-| + iy|Phi-><Psi-| - iy|Psi-><Phi-|] / 2

with ``x + i(-y)`` the complex decoherence factor of the channel.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.linalg import polar

from .channel import ChannelParams, apply_loss_vector, decoherence_factor
from .config import TOL
from .dynamics import jcm_fields
from .errors import CutoffError, DomainError, RegimeWarning
from .fockcore import bell_state, default_dim, make_coherent

P_GEN = 0.5


class Window(NamedTuple):
    lo: float
    hi: float
    empty: bool


def interaction_window(p: ChannelParams, nbar: float) -> Window:
    """Allowed ``g tau`` range ``4 sqrt(e^{gammaT}/eta) <= g tau << 50 sqrt(nbar)``.

    The upper bound is soft (a "much less than" condition).
    """
    if p.eta <= 0.0:
        raise DomainError("eta = 0: no photons reach the second cavity")
    lo = 4.0 * math.sqrt(math.exp(p.gammaT) / p.eta)
    hi = 50.0 * math.sqrt(nbar)
    return Window(lo, hi, lo >= hi)


@dataclass(frozen=True)
class LinkState:
    """Parameters of a generated pair."""

    x: float
    y: float
    phi_qubit: float = 0.0
    nbar: float = float("nan")
    g_tau: float = float("nan")
    channel: ChannelParams = field(default_factory=ChannelParams)

    @property
    def concurrence(self) -> float:
        return math.hypot(self.x, self.y)

    def density(self) -> np.ndarray:
        return xy_density(self.x, self.y, self.phi_qubit)


def xy_density(x: float, y: float, phi: float = 0.0) -> np.ndarray:
    """Two-qubit density matrix parameterized by ``(x, y)``."""
    psi = bell_state("psi_minus")
    ph = bell_state("phi_minus", phi)
    P = lambda a, b: np.outer(a, b.conj())  # noqa: E731
    return 0.5 * ((1 + x) * P(psi, psi) + (1 - x) * P(ph, ph) + 1j * y * P(ph, psi) - 1j * y * P(psi, ph))


def link_state(p: ChannelParams, nbar: float, g_tau: float, phi_qubit: float = 0.0,
               warn: bool = True) -> LinkState:
    """Closed-form ``(x, y)`` for the given channel and interaction.

    A :class:`RegimeWarning` is issued when ``g_tau`` lies outside
    :func:`interaction_window` unless ``warn`` is false.
    """
    win = interaction_window(p, nbar) if p.eta > 0 else Window(math.inf, 0.0, True)
    if warn and (g_tau < win.lo or g_tau >= win.hi):
        warnings.warn(f"g*tau={g_tau:.3g} outside the window [{win.lo:.3g}, {win.hi:.3g})",
                      RegimeWarning, stacklevel=2)
    phi = g_tau / (2.0 * math.sqrt(nbar))
    c = 1.0 - p.chi
    env = math.exp(-nbar * (1.0 - math.cos(2 * phi)) * c)
    arg = nbar * math.sin(2 * phi) * c
    return LinkState(env * math.cos(arg), env * math.sin(arg), phi_qubit, nbar, g_tau, p)


def success_probability_gen() -> float:
    """Postselection success probability (the two field branches are equally weighted)."""
    return P_GEN


class XY(NamedTuple):
    x: float
    y: float
    residual: float


def extract_xy(rho: np.ndarray, phi_qubit: float = 0.0, tol: float = TOL.xy_support) -> XY:
    """Read ``(x, y)`` off a two-qubit density matrix.

    Raises :class:`DomainError` if more than ``tol`` of the weight lies
    outside ``span{Psi-, Phi-}``.
    """
    psi = bell_state("psi_minus")
    ph = bell_state("phi_minus", phi_qubit)
    rpp = np.vdot(psi, rho @ psi).real
    rff = np.vdot(ph, rho @ ph).real
    rpf = np.vdot(psi, rho @ ph)
    residual = float(np.trace(rho).real - rpp - rff)
    if residual > tol:
        raise DomainError(f"weight {residual:.3g} outside the (Psi-, Phi-) support exceeds {tol}")
    # <Psi-|rho|Phi-> = -iy/2
    return XY(float(rpp - rff), float((2j * rpf).real), residual)


# ---------------------------------------------------------------------------
# Fock-space oracle

def _oracle_raw(nbar: float, g_tau: float, chi: float, dim: int) -> tuple[np.ndarray, float]:
    a = math.sqrt(nbar)
    field0 = make_coherent(a, dim)
    if np.sum(np.abs(field0[-2:]) ** 2) > TOL.cutoff_population:
        raise CutoffError(f"dim={dim} too small for nbar={nbar}")
    # qubit A starts in |0>
    fa0, fa1 = jcm_fields(field0, np.zeros(dim, complex), g_tau)
    target = make_coherent(math.sqrt(chi) * a, dim)
    rho = np.zeros((4, 4), complex)
    stacked = np.stack([fa0, fa1])
    for branch in apply_loss_vector(stacked, chi):
        # qubit B starts in |1>: components (qa, qb) -> field
        b0, b1 = jcm_fields(np.zeros_like(branch), branch, g_tau)
        if max(np.sum(np.abs(b0[:, -2:]) ** 2), np.sum(np.abs(b1[:, -2:]) ** 2)) > TOL.cutoff_population:
            raise CutoffError("population reached the top Fock levels")
        w = np.empty(4, complex)
        w[0::2] = b0 @ target.conj()
        w[1::2] = b1 @ target.conj()
        rho += np.outer(w, w.conj())
    prob = float(np.trace(rho).real)
    return rho, prob


@lru_cache(maxsize=32)
def _frame_unitary(nbar: float, g_tau: float, dim: int) -> np.ndarray:
    # local unitary on B that maps the lossless oracle output onto Psi-
    rho, prob = _oracle_raw(nbar, g_tau, 1.0, dim)
    ev, vec = np.linalg.eigh(rho / prob)
    psi = vec[:, -1]
    if ev[-1] < 0.5:
        return np.eye(4, dtype=complex)
    m_target = bell_state("psi_minus").reshape(2, 2)
    m_psi = psi.reshape(2, 2)
    # m_psi = m_target @ W^T for the B-side operator W
    W = np.linalg.solve(m_target, m_psi).T
    V, _ = polar(W)
    return np.kron(np.eye(2), V.conj().T)


def generation_oracle(
    p: ChannelParams,
    nbar: float,
    g_tau: float,
    dim: int | None = None,
    align: bool = True,
) -> tuple[np.ndarray, float]:
    """Dense simulation of the generation pipeline.

    Exact JCM on A, Kraus loss channel, exact JCM on B, projection onto the
    attenuated coherent state ``|sqrt(chi) alpha>``.

    Parameters
    ----------
    align : bool
        Apply the fixed local unitary on qubit B that maps the lossless
        output (same ``nbar``, ``g_tau``) onto ``Psi-``. The exact dynamics
        produce a locally rotated singlet, and the closed form assumes that
        rotation has been undone.

    Returns
    -------
    rho : ndarray
        Normalized conditional two-qubit state.
    prob : float
        Postselection success probability.
    """
    dim = default_dim(nbar) if dim is None else dim
    rho, prob = _oracle_raw(nbar, g_tau, p.chi, dim)
    if prob < TOL.min_success:
        raise DomainError(f"postselection probability {prob:.2e} below {TOL.min_success}")
    rho = rho / prob
    if align and g_tau != 0.0:
        U = _frame_unitary(float(nbar), float(g_tau), int(dim))
        rho = U @ rho @ U.conj().T
    return 0.5 * (rho + rho.conj().T), prob


def link_from_oracle(p: ChannelParams, nbar: float, g_tau: float, dim: int | None = None) -> XY:
    rho, _ = generation_oracle(p, nbar, g_tau, dim)
    return extract_xy(rho)


__all__ = [
    "LinkState", "Window", "XY", "interaction_window", "link_state", "success_probability_gen",
    "generation_oracle", "extract_xy", "xy_density", "decoherence_factor", "link_from_oracle",
]
