"""Truncated Fock-space linear algebra.

Field vectors are plain complex numpy arrays of length ``dim`` indexed by
photon number. Operators are ``(dim, dim)`` arrays. Joint qubit-field
states are wrapped in :class:`CompositeState`, whose subsystem order is
always qubits first and the field last.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import gammainc, gammaln, roots_legendre

from .config import TOL
from .errors import CutoffError, DomainError, NumericsError

SQ2 = 1.0 / math.sqrt(2.0)


def default_dim(nbar: float) -> int:
    """Cutoff ``ceil(nbar + 10 sqrt(nbar)) + 1`` for a coherent state of mean ``nbar``."""
    if nbar < 0:
        raise DomainError("nbar must be non-negative")
    return int(math.ceil(nbar + 10.0 * math.sqrt(nbar))) + 1


def coherent_tail_mass(alpha: complex, dim: int) -> float:
    """Poisson probability of finding ``dim`` or more photons in ``|alpha>``."""
    lam = abs(alpha) ** 2
    if lam == 0.0:
        return 0.0
    return float(gammainc(dim, lam))


def make_coherent(alpha: complex, dim: int, tail_tol: float | None = None) -> np.ndarray:
    """Fock amplitudes of the coherent state ``|alpha>`` truncated to ``dim`` levels.

    Parameters
    ----------
    alpha : complex
        Coherent amplitude.
    dim : int
        Number of Fock levels kept.
    tail_tol : float, optional
        If given, raise :class:`CutoffError` when the discarded Poisson
        tail exceeds it.

    Returns
    -------
    ndarray
        Complex amplitudes ``exp(-|a|^2/2) a^n / sqrt(n!)``.
    """
    if dim < 1:
        raise DomainError("dim must be >= 1")
    if tail_tol is not None:
        tail = coherent_tail_mass(alpha, dim)
        if tail > tail_tol:
            raise CutoffError(f"dim={dim} leaves tail mass {tail:.3e} > {tail_tol:.1e}")
    n = np.arange(dim)
    r = abs(alpha)
    if r == 0.0:
        return (n == 0).astype(complex)
    logamp = -0.5 * r * r + n * math.log(r) - 0.5 * gammaln(n + 1)
    return np.exp(logamp) * np.exp(1j * n * np.angle(alpha))


def coherent_overlap(alpha: complex, beta: complex) -> complex:
    """Exact overlap ``<beta|alpha>`` of two coherent states."""
    alpha = complex(alpha)
    beta = complex(beta)
    return complex(np.exp(-0.5 * (abs(alpha) ** 2 + abs(beta) ** 2) + beta.conjugate() * alpha))


def annihilation(dim: int) -> np.ndarray:
    """Truncated annihilation operator."""
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def number_op(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


# ---------------------------------------------------------------------------
# homodyne half-line projectors

def hermite_functions(x: np.ndarray, dim: int) -> np.ndarray:
    """Normalized oscillator eigenfunctions ``psi_n(x)`` for ``n < dim``.

    Uses the stable three-term recurrence
    ``psi_n = sqrt(2/n) x psi_{n-1} - sqrt((n-1)/n) psi_{n-2}``.
    """
    x = np.asarray(x, dtype=float)
    psi = np.empty((dim, x.size))
    psi[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if dim > 1:
        psi[1] = math.sqrt(2.0) * x * psi[0]
    for n in range(2, dim):
        psi[n] = math.sqrt(2.0 / n) * x * psi[n - 1] - math.sqrt((n - 1) / n) * psi[n - 2]
    return psi


@lru_cache(maxsize=8)
def _gauss_legendre(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    return roots_legendre(nodes)


def _halfline_raw(dim: int, nodes: int) -> np.ndarray:
    # Gauss-Legendre on [0, L]; psi_n is negligible beyond the classical turning point + margin
    L = math.sqrt(2 * dim + 1) + 12.0
    xg, wg = _gauss_legendre(nodes)
    x = 0.5 * L * (xg + 1.0)
    w = 0.5 * L * wg
    psi = hermite_functions(x, dim)
    return (psi * w) @ psi.T


@lru_cache(maxsize=64)
def _halfline_real(dim: int) -> np.ndarray:
    if dim == 1:
        proj = np.ones((1, 1))
        proj.setflags(write=False)
        return proj
    if dim % 2:
        # odd dim: the rounded spectrum would contain an exact 1/2 eigenvector with
        # sizeable low-Fock weight; build on dim-1 and leave the top level to the < 0 side
        proj = np.zeros((dim, dim))
        proj[:-1, :-1] = _halfline_real(dim - 1)
        proj.setflags(write=False)
        return proj
    nodes = TOL.quad_nodes_start
    prev = _halfline_raw(dim, nodes)
    while True:
        nodes *= 2
        cur = _halfline_raw(dim, nodes)
        diff = np.abs(cur - prev)
        if diff.max() < TOL.quad_converge:
            break
        if nodes * 2 > TOL.quad_nodes_max:
            m, n = np.unravel_index(np.argmax(diff), diff.shape)
            raise NumericsError(
                f"half-line quadrature did not converge; worst element (m={m}, n={n}) "
                f"changed by {diff[m, n]:.2e} at {nodes} nodes"
            )
        prev = cur
    # The compression of the projector onto the truncated space is not idempotent;
    # round its spectrum to {0, 1}.
    ev, vec = np.linalg.eigh(cur)
    keep = ev >= 0.5 - 1e-9
    proj = vec[:, keep] @ vec[:, keep].T
    proj = 0.5 * (proj + proj.T)
    proj.setflags(write=False)
    return proj


def quad_halfline_projector(phase: float, sign: str, dim: int) -> np.ndarray:
    """Projector onto a half-line of the rotated quadrature ``x_phase``.

    Parameters
    ----------
    phase : float
        Quadrature angle in radians. ``phase=0`` is the position quadrature
        ``(a + a^dag)/sqrt 2``; ``phase=pi/2`` picks out states with positive
        imaginary amplitude.
    sign : {">=0", "<0"}
        Which half-line.
    dim : int
        Fock cutoff.

    Returns
    -------
    ndarray
        Hermitian idempotent ``(dim, dim)`` matrix. The two signs sum to
        the identity.
    """
    if dim < 1:
        raise DomainError("dim must be >= 1")
    if sign not in (">=0", "<0"):
        raise DomainError("sign must be '>=0' or '<0'")
    p0 = _halfline_real(dim)
    m = np.arange(dim)
    rot = np.exp(1j * phase * (m[:, None] - m[None, :]))
    p = p0 * rot
    if sign == "<0":
        p = np.eye(dim) - p
    return p


# ---------------------------------------------------------------------------
# composite systems

@dataclass(frozen=True)
class CompositeState:
    """Joint state of several qubits and one field mode.

    ``dims`` lists subsystem dimensions in tensor order (qubits first,
    field last). ``data`` is a state vector when ``pure`` is true and a
    density matrix otherwise.
    """

    dims: tuple
    data: np.ndarray
    pure: bool

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def density(self) -> np.ndarray:
        if self.pure:
            v = self.data.reshape(-1)
            return np.outer(v, v.conj())
        return self.data

    def trace(self) -> float:
        if self.pure:
            return float(np.vdot(self.data, self.data).real)
        return float(np.trace(self.data).real)

    def as_mixed(self) -> "CompositeState":
        return CompositeState(self.dims, self.density(), False)

    @staticmethod
    def product(*parts: np.ndarray) -> "CompositeState":
        """Pure product state from per-subsystem vectors."""
        v = np.array([1.0 + 0j])
        for p in parts:
            v = np.kron(v, np.asarray(p, dtype=complex))
        return CompositeState(tuple(len(p) for p in parts), v, True)


def partial_trace(state: CompositeState, keep: Sequence[int]) -> CompositeState:
    """Reduce ``state`` to the subsystems listed in ``keep`` (kept in ascending order)."""
    keep = sorted(set(int(k) for k in keep))
    nsys = len(state.dims)
    if not keep:
        raise DomainError("keep must be non-empty")
    if keep[0] < 0 or keep[-1] >= nsys:
        raise DomainError(f"subsystem index out of range for {nsys} subsystems")
    drop = [i for i in range(nsys) if i not in keep]
    kd = tuple(state.dims[i] for i in keep)
    dk = int(np.prod(kd))
    if state.pure:
        t = state.data.reshape(state.dims).transpose(keep + drop).reshape(dk, -1)
        rho = t @ t.conj().T
    else:
        t = state.data.reshape(state.dims + state.dims)
        # move kept axes first on both sides, then contract dropped pairs
        perm = keep + drop + [nsys + i for i in keep] + [nsys + i for i in drop]
        t = t.transpose(perm)
        dd = int(np.prod([state.dims[i] for i in drop])) if drop else 1
        t = t.reshape(dk, dd, dk, dd)
        rho = np.einsum("ajbj->ab", t)
    return CompositeState(kd, rho, False)


# ---------------------------------------------------------------------------
# two-qubit states

def bell_state(name: str, phi: float = 0.0) -> np.ndarray:
    """Bell vectors in the ``{|00>, |01>, |10>, |11>}`` basis.

    ``phi_minus`` and ``phi_plus`` accept the relative phase of
    ``(e^{-i phi}|00> -+ e^{i phi}|11>)/sqrt 2``.
    """
    e = np.exp(-1j * phi)
    table = {
        "psi_minus": [0, SQ2, -SQ2, 0],
        "psi_plus": [0, SQ2, SQ2, 0],
        "phi_minus": [SQ2 * e, 0, 0, -SQ2 * np.conj(e)],
        "phi_plus": [SQ2 * e, 0, 0, SQ2 * np.conj(e)],
    }
    try:
        return np.array(table[name], dtype=complex)
    except KeyError:
        raise DomainError(f"unknown Bell state {name!r}") from None


def check_density(rho: np.ndarray, tol: float = TOL.psd) -> np.ndarray:
    """Validate a density matrix and return it as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DomainError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > max(tol, TOL.hermitian):
        raise DomainError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > max(tol, TOL.trace):
        raise DomainError(f"density matrix trace {np.trace(rho).real} != 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -tol:
        raise DomainError("density matrix is not positive semidefinite")
    return rho


_YY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    The ``lambda_i`` are taken as singular values of
    ``sqrt(rho) (Y x Y) sqrt(rho)^*``, which avoids square roots of
    near-zero eigenvalues of ``rho rho~``.
    """
    rho = check_density(rho)
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    sq = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    lam = np.linalg.svd(sq @ _YY @ sq.conj(), compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def fidelity_pure(rho: np.ndarray, psi: np.ndarray) -> float:
    """``<psi|rho|psi>`` for a normalized vector ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    return float(np.vdot(psi, rho @ psi).real)
