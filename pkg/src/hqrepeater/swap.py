"""Bell measurement with two cavity passes, and the swap fidelity map.

Two qubits cross cavity 1 (field ``|alpha>``, ``alpha = sqrt(nbar)``) and
then cavity 2 (field ``|i alpha>``), each for the half-rotation time
``tau = 1/2``. After each pass a homodyne half-plane measurement asks
whether the field is still on the side of its initial coherent state
("signal") or not. The four detector patterns identify the four Bell
states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .dynamics import TcmParams, tcm_fields
from .errors import CutoffError, DomainError
from .fockcore import bell_state, default_dim, make_coherent, quad_halfline_projector
from .config import TOL


@dataclass(frozen=True)
class SwapOutcome:
    """Detector pattern ``(cavity 1 signals, cavity 2 signals)`` and its Bell label.

    ``phase`` is the scalar the classical message carries for the
    end-to-end pair; the consumer removes it.
    """

    detector_pattern: tuple
    bell_label: str
    phase: complex


OUTCOMES = (
    SwapOutcome((True, True), "psi_minus", -1.0 + 0j),
    SwapOutcome((True, False), "phi_minus", 1j),
    SwapOutcome((False, True), "phi_plus", -1j),
    SwapOutcome((False, False), "psi_plus", 1.0 + 0j),
)
LABELS = tuple(o.bell_label for o in OUTCOMES)


def _pattern_key(pattern) -> str:
    return "".join("s" if s else "n" for s in pattern)


def _coeffs(coeffs) -> dict:
    if isinstance(coeffs, Mapping):
        c = {k: complex(coeffs.get(k, 0.0)) for k in LABELS}
    else:
        am, ap, bm, bp = (complex(v) for v in coeffs)
        c = {"psi_minus": am, "psi_plus": ap, "phi_minus": bm, "phi_plus": bp}
    return c


def bell_measurement_analytic(coeffs) -> dict:
    """Ideal outcome distribution.

    Parameters
    ----------
    coeffs : (a_minus, a_plus, b_minus, b_plus) or mapping by Bell label
        Amplitudes on ``Psi-, Psi+, Phi-, Phi+``.

    Returns
    -------
    dict
        Pattern string (``"ss"``, ``"sn"``, ``"ns"``, ``"nn"``) to
        ``(SwapOutcome, probability)``.
    """
    c = _coeffs(coeffs)
    norm = sum(abs(v) ** 2 for v in c.values())
    if abs(norm - 1.0) > 1e-10:
        raise DomainError(f"coefficients not normalized (sum |c|^2 = {norm})")
    return {_pattern_key(o.detector_pattern): (o, abs(c[o.bell_label]) ** 2) for o in OUTCOMES}


def bell_coefficients(psi: np.ndarray) -> tuple:
    """Amplitudes ``(a_minus, a_plus, b_minus, b_plus)`` of a two-qubit vector."""
    psi = np.asarray(psi, dtype=complex)
    return tuple(np.vdot(bell_state(k), psi) for k in ("psi_minus", "psi_plus", "phi_minus", "phi_plus"))


# expected qubit state after each pattern, before the classical correction
POST_STATES = {
    "ss": bell_state("psi_minus"),
    "sn": bell_state("phi_plus", -math.pi / 2),
    "ns": bell_state("phi_minus", math.pi / 2),
    "nn": bell_state("psi_plus"),
}


@dataclass(frozen=True)
class OracleOutcome:
    probability: float
    analytic_probability: float
    conditional_fidelity: float


@dataclass(frozen=True)
class BellOracleReport:
    outcomes: dict
    total_variation: float
    nbar: float
    dim: int

    def probabilities(self) -> dict:
        return {k: v.probability for k, v in self.outcomes.items()}


def _evolve(psi: np.ndarray, gt: float) -> np.ndarray:
    out = tcm_fields(psi, gt)
    if np.sum(np.abs(out[:, -2:]) ** 2) > TOL.cutoff_population:
        raise CutoffError("TCM output reached the top Fock levels")
    return out


def bell_measurement_oracle(state: np.ndarray, nbar: float, dim: int | None = None,
                            tau: float = 0.5) -> BellOracleReport:
    """Fock-space simulation of the two-cavity Bell measurement.

    Parameters
    ----------
    state : ndarray
        Two-qubit input, a 4-vector or a 4x4 density matrix.
    nbar : float
        Mean photon number of both cavity fields.
    dim : int, optional
        Fock cutoff; defaults to :func:`default_dim`.
    tau : float
        Dimensionless interaction time of each pass.

    Returns
    -------
    BellOracleReport
        Outcome probabilities, fidelity of each conditional qubit state with
        the ideal post-measurement state, and the total-variation distance
        from :func:`bell_measurement_analytic`.

    Notes
    -----
    Cavity 1 holds the real amplitude ``sqrt(nbar)`` and is read with the
    ``phase=0`` half-plane projector; cavity 2 holds ``i sqrt(nbar)`` and is
    read with the ``phase=pi/2`` projector. In each case "signal" is the
    half-plane containing the initial coherent state.
    """
    dim = default_dim(nbar) if dim is None else dim
    state = np.asarray(state, dtype=complex)
    rho_in = np.outer(state, state.conj()) if state.ndim == 1 else state
    a = math.sqrt(nbar)
    gt = TcmParams(nbar, tau).gt
    f1 = make_coherent(a, dim)
    f2 = make_coherent(1j * a, dim)
    P1 = quad_halfline_projector(0.0, ">=0", dim)
    P2 = quad_halfline_projector(math.pi / 2, ">=0", dim)
    proj1 = {True: P1, False: np.eye(dim) - P1}
    proj2 = {True: P2, False: np.eye(dim) - P2}

    def branches(rho):
        w, v = np.linalg.eigh(rho)
        return [(wk, v[:, k]) for k, wk in enumerate(w) if wk > 1e-14]

    cond = {}
    for s1 in (True, False):
        rho_mid = np.zeros((4, 4), complex)
        for w, v in branches(rho_in):
            out = _evolve(v[:, None] * f1[None, :], gt)
            phi = out @ proj1[s1].T
            rho_mid += w * (phi @ phi.conj().T)
        for s2 in (True, False):
            rho_out = np.zeros((4, 4), complex)
            for w, v in branches(rho_mid):
                out = _evolve(v[:, None] * f2[None, :], gt)
                phi = out @ proj2[s2].T
                rho_out += w * (phi @ phi.conj().T)
            cond[(s1, s2)] = rho_out
    coeffs = bell_coefficients_density(rho_in)
    ideal = bell_measurement_analytic(coeffs)
    outcomes = {}
    tv = 0.0
    for pat, r in cond.items():
        key = _pattern_key(pat)
        p = float(np.trace(r).real)
        fid = float(np.vdot(POST_STATES[key], r @ POST_STATES[key]).real / p) if p > 1e-14 else float("nan")
        outcomes[key] = OracleOutcome(p, ideal[key][1], fid)
        tv += abs(p - ideal[key][1])
    return BellOracleReport(outcomes, 0.5 * tv, nbar, dim)


def bell_coefficients_density(rho: np.ndarray) -> dict:
    """Bell-basis populations of ``rho`` as amplitudes ``sqrt(p)`` keyed by label."""
    return {k: math.sqrt(max(np.vdot(bell_state(k), rho @ bell_state(k)).real, 0.0)) for k in LABELS}


# ---------------------------------------------------------------------------
# swapping of two pairs

def swap_outcome_states(psi_ab1: np.ndarray, psi_b2c: np.ndarray) -> dict:
    """Ideal swap of two pairs ``A-B1`` and ``B2-C``.

    Projects ``(B1, B2)`` onto each Bell state and returns, per label,
    ``(probability, normalized A-C state)``.
    """
    t = np.kron(np.asarray(psi_ab1, complex), np.asarray(psi_b2c, complex)).reshape(2, 2, 2, 2)
    t = t.transpose(0, 3, 1, 2).reshape(4, 4)  # (AC, B1B2)
    out = {}
    for label in LABELS:
        v = t @ bell_state(label).conj()
        p = float(np.vdot(v, v).real)
        out[label] = (p, v / math.sqrt(p) if p > 0 else v)
    return out


def swap_fidelity_map(F: float) -> float:
    """Fidelity after swapping two pairs of fidelity ``F``: ``1 - 2F(1-F)``."""
    if not 0.5 - 1e-15 <= F <= 1.0 + 1e-15:
        raise DomainError(f"F={F} outside [1/2, 1]")
    return 1.0 - 2.0 * F * (1.0 - F)


def iterate_swaps(F0: float, k: int) -> float:
    """``k``-fold application of :func:`swap_fidelity_map`."""
    if k < 0:
        raise DomainError("k must be >= 0")
    F = F0
    for _ in range(k):
        F = swap_fidelity_map(F)
    return F


def swap_rounds(n_links: int) -> int:
    """Nested swap rounds ``ceil(log2 n)`` for ``n`` links."""
    if n_links < 1:
        raise DomainError("n_links must be >= 1")
    return (n_links - 1).bit_length()


def x_from_fidelity(F: float) -> float:
    """Link parameter equivalent to fidelity ``F`` (``x = 2F - 1``, ``y = 0``)."""
    return 2.0 * F - 1.0


__all__ = [
    "SwapOutcome", "OUTCOMES", "bell_measurement_analytic", "bell_measurement_oracle",
    "bell_coefficients", "swap_outcome_states", "swap_fidelity_map", "iterate_swaps",
    "swap_rounds", "x_from_fidelity", "POST_STATES",
]
