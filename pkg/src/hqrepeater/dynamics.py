"""Resonant qubit-field propagators in the interaction picture.

One qubit (Jaynes-Cummings) and two symmetrically coupled qubits
(Tavis-Cummings). Qubit ``|0>`` is the ground state: ``|1, n>`` couples to
``|0, n+1>`` with strength ``g sqrt(n+1)``. Free evolution phases are
removed by the interaction picture and never enter the numerics.

The exact propagators act on truncated Fock vectors. The approximate ones
return :class:`BranchState` objects, lists of (qubit vector, field
amplitude, field kind) triples that downstream code can transform in
closed form or expand into dense vectors for comparison.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import TOL
from .errors import CutoffError, DomainError, RegimeWarning
from .fockcore import CompositeState, make_coherent, SQ2


@dataclass(frozen=True)
class JcmParams:
    """Single-qubit interaction.

    Attributes
    ----------
    g : float
        Coupling in rad/s (any unit works as long as ``g*tau`` is an angle).
    tau : float
        Interaction time.
    nbar : float
        Mean photon number of the input coherent state.
    omega_c : float
        Mode frequency. Only bookkept, never used numerically.
    """

    g: float
    tau: float
    nbar: float
    omega_c: float = 0.0

    @property
    def g_tau(self) -> float:
        return self.g * self.tau

    @property
    def phi(self) -> float:
        """Branch rotation angle ``g tau / (2 sqrt nbar)``."""
        return self.g_tau / (2.0 * math.sqrt(self.nbar))

    def check_regime(self) -> None:
        # the windowed form g tau << 50 sqrt(nbar) is enforced; the 16 pi form is logged alongside
        if self.nbar <= 0:
            return
        if self.g_tau >= 50.0 * math.sqrt(self.nbar):
            warnings.warn(
                f"g*tau={self.g_tau:.3g} not << 50 sqrt(nbar)={50 * math.sqrt(self.nbar):.3g} "
                f"(g*tau/sqrt(nbar)={self.g_tau / math.sqrt(self.nbar):.3g} vs 16 pi)",
                RegimeWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class TcmParams:
    """Two-qubit interaction with dimensionless time ``tau = g t / (pi sqrt(4 nbar + 2))``."""

    nbar: float
    tau_dimless: float
    g: float = 1.0

    @property
    def gt(self) -> float:
        return self.tau_dimless * math.pi * math.sqrt(4.0 * self.nbar + 2.0)

    @property
    def in_collapse(self) -> bool:
        return 0.25 <= self.tau_dimless <= 0.75


def _check_top(vecs: Sequence[np.ndarray], what: str) -> None:
    pop = sum(float(np.sum(np.abs(v[-2:]) ** 2)) for v in vecs)
    if pop > TOL.cutoff_population:
        raise CutoffError(f"{what}: population {pop:.2e} in the top two Fock levels")


def jcm_fields(c0: np.ndarray, c1: np.ndarray, g_tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Evolve the field components of ``|0>c0 + |1>c1`` for angle ``g_tau``.

    Returns the new ``(c0, c1)``. The top level ``|1, dim-1>`` has no partner
    inside the truncation and is left unchanged.
    """
    dim = c0.shape[-1]
    w = g_tau * np.sqrt(np.arange(1, dim + 1))
    cw, sw = np.cos(w), np.sin(w)
    out0 = np.empty_like(c0, dtype=complex)
    out1 = np.empty_like(c1, dtype=complex)
    out0[..., 0] = c0[..., 0]
    a0 = c0[..., 1:]
    a1 = c1[..., :-1]
    out1[..., :-1] = cw[:-1] * a1 - 1j * sw[:-1] * a0
    out0[..., 1:] = cw[:-1] * a0 - 1j * sw[:-1] * a1
    out1[..., -1] = c1[..., -1]
    return out0, out1


def jcm_exact(qubit: Sequence[complex], field: np.ndarray, p: JcmParams) -> CompositeState:
    """Exact JCM evolution of the product ``qubit (x) field``.

    Returns a pure :class:`CompositeState` with dims ``(2, dim)``.
    """
    q = np.asarray(qubit, dtype=complex)
    field = np.asarray(field, dtype=complex)
    _check_top([field], "jcm_exact input")
    o0, o1 = jcm_fields(q[0] * field, q[1] * field, p.g_tau)
    _check_top([o0, o1], "jcm_exact output")
    return CompositeState((2, field.size), np.concatenate([o0, o1]), True)


# ---------------------------------------------------------------------------
# branch decompositions

@dataclass(frozen=True)
class Branch:
    """One term ``qubits (x) |field>``.

    ``kind`` is ``"coherent"`` for ``|alpha>`` or ``"tcm+"``/``"tcm-"`` for
    the quadratic-phase states produced by the two-qubit interaction.
    The overall scalar phase is folded into ``qubits``.
    """

    qubits: np.ndarray
    alpha: complex
    kind: str = "coherent"
    nbar: float = 0.0
    tau_dimless: float = 0.0

    def field_vector(self, dim: int) -> np.ndarray:
        amps = make_coherent(self.alpha, dim)
        if self.kind == "coherent":
            return amps
        sgn = 1.0 if self.kind == "tcm+" else -1.0
        n = np.arange(dim)
        nb = self.nbar
        phase = 2 * math.pi * self.tau_dimless * (nb + 1 + n - (n - nb) ** 2 / (4 * nb + 2))
        return amps * np.exp(1j * sgn * phase)


@dataclass(frozen=True)
class BranchState:
    branches: tuple

    def norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(b.qubits) for b in self.branches])

    def to_vector(self, dim: int) -> np.ndarray:
        """Dense joint vector with the field as the last (fastest) index."""
        out = 0
        for b in self.branches:
            out = out + np.kron(b.qubits, b.field_vector(dim))
        return np.asarray(out, dtype=complex)


def jcm_approx(
    qubit: Sequence[complex],
    field_amp: complex,
    p: JcmParams,
    qubit_phase: bool = True,
) -> BranchState:
    """Two-branch linearized JCM solution.

    Linearizing ``sqrt(n)`` around ``nbar`` splits ``|q>|alpha>`` into two
    coherent branches ``|alpha e^{-+i phi}>`` carrying phases
    ``e^{-+i g tau sqrt(nbar)/2}``, ``phi = g tau / (2 sqrt nbar)``.

    Parameters
    ----------
    qubit_phase : bool
        Keep the first-order factor ``e^{-+i phi}`` on the ``|1>``
        component, which follows from linearizing ``sqrt(n+1)`` rather than
        ``sqrt(n)``. ``False`` drops it.
    """
    p.check_regime()
    c0, c1 = (complex(v) for v in qubit)
    alpha = complex(field_amp)
    if p.g_tau == 0.0:
        return BranchState((Branch(np.array([c0, c1]), alpha),))
    e = np.exp(1j * np.angle(alpha)) if alpha != 0 else 1.0
    phi = p.phi
    theta = p.g_tau * math.sqrt(p.nbar)
    branches = []
    for s in (-1, 1):
        # s=-1: e^{-i theta/2}|alpha e^{-i phi}>, s=+1: e^{+i theta/2}|alpha e^{+i phi}>
        q1ph = np.exp(1j * s * phi) if qubit_phase else 1.0
        b0 = 0.5 * (c0 - s * c1 / e)
        b1 = 0.5 * (c1 - s * c0 * e) * q1ph
        glob = np.exp(1j * s * theta / 2)
        branches.append(Branch(glob * np.array([b0, b1]), alpha * np.exp(1j * s * phi)))
    return BranchState(tuple(branches))


# ---------------------------------------------------------------------------
# two qubits

def tcm_fields(psi: np.ndarray, gt: float) -> np.ndarray:
    """Exact TCM evolution of a joint ``(4, dim)`` amplitude array.

    Rows are the qubit basis ``|00>, |01>, |10>, |11>``. The singlet is
    untouched; each excitation sector ``(|00,N>, |Psi+,N-1>, |11,N-2>)``
    is propagated with its closed-form 3x3 eigen-decomposition.
    """
    psi = np.asarray(psi, dtype=complex)
    dim = psi.shape[1]
    sm = SQ2 * (psi[1] - psi[2])
    sp = SQ2 * (psi[1] + psi[2])
    N = np.arange(dim + 2)
    v0 = np.zeros(dim + 2, complex)
    v1 = np.zeros(dim + 2, complex)
    v2 = np.zeros(dim + 2, complex)
    v0[:dim] = psi[0]
    v1[1:dim + 1] = sp
    v2[2:] = psi[3]
    # couplings <00,N|H|Psi+,N-1> = sqrt(2N), <Psi+,N-1|H|11,N-2> = sqrt(2(N-1)); zero where a state is missing
    a = np.where((N < dim) & (N >= 1), np.sqrt(2.0 * N), 0.0)
    b = np.where((N >= 2) & (N - 1 < dim), np.sqrt(2.0 * np.maximum(N - 1, 0)), 0.0)
    lam = np.sqrt(a * a + b * b)
    safe = np.where(lam > 0, lam, 1.0)
    # eigenvectors: zero mode (b, 0, -a)/lam, bright modes (a, +-lam, b)/(sqrt2 lam)
    z0 = (b * v0 - a * v2) / safe
    bp = (a * v0 + lam * v1 + b * v2) / (math.sqrt(2.0) * safe)
    bm = (a * v0 - lam * v1 + b * v2) / (math.sqrt(2.0) * safe)
    ep = np.exp(-1j * lam * gt)
    em = np.conj(ep)
    bp, bm = bp * ep, bm * em
    r0 = (b * z0 + a * (bp + bm) / math.sqrt(2.0)) / safe
    r1 = (lam * (bp - bm) / math.sqrt(2.0)) / safe
    r2 = (-a * z0 + b * (bp + bm) / math.sqrt(2.0)) / safe
    dark = lam == 0
    r0 = np.where(dark, v0, r0)
    r1 = np.where(dark, v1, r1)
    r2 = np.where(dark, v2, r2)
    out = np.empty_like(psi)
    out[0] = r0[:dim]
    out[3] = r2[2:]
    spo = r1[1:dim + 1]
    out[1] = SQ2 * (spo + sm)
    out[2] = SQ2 * (spo - sm)
    return out


def tcm_exact(two_qubits: Sequence[complex] | np.ndarray, field: np.ndarray | None,
              p: TcmParams) -> CompositeState:
    """Exact TCM evolution.

    ``two_qubits`` is either a 4-vector (combined with ``field``) or a full
    ``(4, dim)`` joint amplitude array (then ``field`` must be ``None``).
    Returns a pure state with dims ``(2, 2, dim)``.
    """
    arr = np.asarray(two_qubits, dtype=complex)
    if arr.ndim == 1:
        if field is None:
            raise DomainError("field vector required for a 4-vector qubit input")
        field = np.asarray(field, dtype=complex)
        psi = arr[:, None] * field[None, :]
    else:
        psi = arr
    _check_top(list(psi), "tcm_exact input")
    out = tcm_fields(psi, p.gt * p.g)
    _check_top(list(out), "tcm_exact output")
    return CompositeState((2, 2, psi.shape[1]), out.reshape(-1), True)


def tcm_approx(bell_coeffs: Sequence[complex], field_amp: complex, p: TcmParams) -> BranchState:
    """Three-branch approximation of the two-qubit interaction.

    Parameters
    ----------
    bell_coeffs : (a_minus, a_plus, b_minus, b_plus)
        Amplitudes on ``Psi-, Psi+, Phi-, Phi+``.
    field_amp : complex
        Coherent amplitude of the cavity field.
    """
    if not p.in_collapse:
        warnings.warn(f"tau={p.tau_dimless} outside the collapse window [1/4, 3/4]",
                      RegimeWarning, stacklevel=2)
    am, ap, bm, bp = (complex(c) for c in bell_coeffs)
    from .fockcore import bell_state

    psim, psip = bell_state("psi_minus"), bell_state("psi_plus")
    phim = bell_state("phi_minus")
    th = 2 * math.pi * p.tau_dimless
    branches = []
    dark = am * psim + bm * phim
    if np.linalg.norm(dark) > 0:
        branches.append(Branch(dark, field_amp))
    c_plus = 0.5 * (ap - bp)
    c_minus = 0.5 * (ap + bp)
    if c_plus != 0:
        branches.append(Branch(c_plus * (psip - bell_state("phi_plus", th)), field_amp,
                               "tcm+", p.nbar, p.tau_dimless))
    if c_minus != 0:
        branches.append(Branch(c_minus * (psip + bell_state("phi_plus", -th)), field_amp,
                               "tcm-", p.nbar, p.tau_dimless))
    return BranchState(tuple(branches))
