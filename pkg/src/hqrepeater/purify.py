"""Recurrence entanglement purification.

Each round consumes two pairs of the form
``f |Psi-><Psi-| + g |Psi+><Psi+| + h (|Psi-><Psi+| + h.c.)`` and, on
success, returns one pair with

    f' = f^2 / s,  g' = g^2 / s,  h' = h^2 / s,  s = f^2 + g^2,

with per-round success probability ``P_k = s / 2``. Overall success of an
``N``-round tree is ``prod_k P_k^{2^{N-1-k}}`` and is accumulated in log
space.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .fockcore import bell_state


def m_gate(phi: float = 0.0) -> np.ndarray:
    """Rank-2 operation ``|Psi-><Psi-| + |Phi-_phi><Phi-_phi|`` on two qubits of one node."""
    a = bell_state("psi_minus")
    b = bell_state("phi_minus", phi)
    return np.outer(a, a.conj()) + np.outer(b, b.conj())


def apply_m_gate(rho: np.ndarray, phi: float = 0.0) -> tuple[np.ndarray, float]:
    """Return ``(M rho M^dag / p, p)``; the state is ``None`` when ``p == 0``."""
    M = m_gate(phi)
    out = M @ rho @ M.conj().T
    p = float(np.trace(out).real)
    return (out / p if p > 0 else None), p


@dataclass(frozen=True)
class PurificationTrack:
    """Coefficients after ``round`` purification rounds.

    ``h`` is ``None`` at round 0, where the cross term is not defined.
    ``x0`` and ``y0`` are the seed link parameters.
    """

    f: float
    g: float
    h: float | None
    round: int
    per_round_probs: tuple = ()
    log_overall_prob: float = 0.0
    x0: float = 0.0
    y0: float = 0.0

    @property
    def overall_prob(self) -> float:
        return math.exp(self.log_overall_prob)

    @property
    def fidelity(self) -> float:
        return max(self.f, self.g)

    @property
    def direction(self) -> str:
        """``"psi_minus"``, ``"psi_plus"`` or ``"undefined"`` on the tie line."""
        if self.f > self.g:
            return "psi_minus"
        if self.g > self.f:
            return "psi_plus"
        return "undefined"


def purify_track_init(x: float, y: float = 0.0) -> PurificationTrack:
    """Round-0 track ``f = (1+x)/2``, ``g = (1-x)/2``.

    The local rotation that maps ``Phi-`` to ``Phi+`` ahead of the first
    round is implied here rather than simulated.
    """
    if x * x + y * y > 1.0 + 1e-12:
        raise DomainError("x^2 + y^2 must not exceed 1")
    return PurificationTrack(0.5 * (1 + x), 0.5 * (1 - x), None, 0, (), 0.0, x, y)


def purify_step(t: PurificationTrack) -> PurificationTrack:
    """One recurrence round."""
    s = t.f * t.f + t.g * t.g
    if s <= 0.0:
        raise DomainError("degenerate track with f = g = 0")
    if t.h is None:
        h_new = t.y0 * t.y0 / (2.0 + 2.0 * t.x0 * t.x0)
    else:
        h_new = t.h * t.h / s
    return replace(
        t,
        f=t.f * t.f / s,
        g=t.g * t.g / s,
        h=h_new,
        round=t.round + 1,
        per_round_probs=t.per_round_probs + (0.5 * s,),
    )


def log_overall(probs) -> float:
    """``sum_k 2^{N-1-k} ln P_k``."""
    N = len(probs)
    return math.fsum((2.0 ** (N - 1 - k)) * math.log(p) for k, p in enumerate(probs)) if N else 0.0


def purify_n(x: float, y: float, N: int) -> PurificationTrack:
    """Iterate :func:`purify_step` ``N`` times and set the overall probability."""
    if N < 0:
        raise DomainError("N must be >= 0")
    t = purify_track_init(x, y)
    for _ in range(N):
        t = purify_step(t)
    return replace(t, log_overall_prob=log_overall(t.per_round_probs))


# ---------------------------------------------------------------------------
# brute-force oracle

_UI = np.diag([1j, 1.0])
_X = np.array([[0, 1], [1, 0]], dtype=complex)


def correction(i: int, j: int) -> np.ndarray:
    """Outcome-dependent local correction on the kept pair ``(A1, B1)``.

    ``U_k = diag(i, 1) X^k``; node A applies ``U_{i+1}`` and node B ``U_j``
    where ``i`` (``j``) is the measured value of ``A2`` (``B2``).
    """
    ua = _UI @ np.linalg.matrix_power(_X, (i + 1) % 2)
    ub = _UI @ np.linalg.matrix_power(_X, j % 2)
    return np.kron(ua, ub)


def pre_rotation(kind: str = "generated") -> np.ndarray:
    """Local rotation applied at both nodes before a round.

    ``"generated"`` maps ``Phi-`` to ``Phi+`` (pairs straight from
    generation); ``"purified"`` maps ``Psi+`` to ``Phi+`` (pairs from a
    previous round). Both leave ``Psi-`` invariant up to a phase.
    """
    S = np.diag([1.0, 1j])
    H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if kind not in ("generated", "purified"):
        raise DomainError(f"unknown rotation {kind!r}")
    u = S if kind == "generated" else S @ H
    return np.kron(u, u)


def _swap_axes(rho16: np.ndarray) -> np.ndarray:
    # (A1 B1 A2 B2) <-> (A1 A2 B1 B2); the permutation is an involution
    t = rho16.reshape([2] * 8)
    return t.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(16, 16)


def purify_oracle_step(rho1: np.ndarray, rho2: np.ndarray, phi: float = 0.0,
                       rotation: str | None = "generated") -> tuple[np.ndarray, float]:
    """One round on explicit 4x4 inputs.

    Pair 1 is ``(A1, B1)`` and pair 2 is ``(A2, B2)``. Both pairs first get
    :func:`pre_rotation` of kind ``rotation`` (``None`` skips it). Then
    ``M (x) M`` is applied with node grouping ``A1A2 / B1B2``, ``A2, B2``
    are measured in the computational basis, :func:`correction` is applied
    and the outcomes are summed.

    Returns
    -------
    rho : ndarray or None
        Normalized output, ``None`` if the success probability is zero.
    prob : float
        Total success probability.
    """
    if rotation is not None:
        R = pre_rotation(rotation)
        rho1 = R @ rho1 @ R.conj().T
        rho2 = R @ rho2 @ R.conj().T
    rho = _swap_axes(np.kron(rho1, rho2))
    MM = np.kron(m_gate(phi), m_gate(phi))
    rho = _swap_axes(MM @ rho @ MM.conj().T)
    t = rho.reshape(4, 4, 4, 4)  # (pair1, pair2, pair1', pair2')
    out = np.zeros((4, 4), complex)
    for i, j in itertools.product((0, 1), (0, 1)):
        k = 2 * i + j
        r = t[:, k, :, k]
        if np.trace(r).real <= 0.0:
            continue
        U = correction(i, j)
        out += U @ r @ U.conj().T
    p = float(np.trace(out).real)
    if p <= 0.0:
        return None, 0.0
    return out / p, p


def track_density(t: PurificationTrack) -> np.ndarray:
    """Density matrix ``f Psi- + g Psi+ + h (cross)`` of a track (``h`` read as 0 at round 0)."""
    a = bell_state("psi_minus")
    b = bell_state("psi_plus")
    h = 0.0 if t.h is None else t.h
    return (t.f * np.outer(a, a) + t.g * np.outer(b, b) + h * (np.outer(a, b) + np.outer(b, a))).astype(complex)


def track_coefficients(rho: np.ndarray) -> tuple[float, float, float]:
    """Read ``(f, g, |h|)`` off a state in the ``Psi-/Psi+`` span."""
    a = bell_state("psi_minus")
    b = bell_state("psi_plus")
    f = np.vdot(a, rho @ a).real
    g = np.vdot(b, rho @ b).real
    h = abs(np.vdot(a, rho @ b))
    return float(f), float(g), float(h)
