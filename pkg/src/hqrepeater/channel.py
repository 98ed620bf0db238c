"""Fiber and mirror loss acting on coherent field branches.

A fiber with accumulated loss exponent ``gammaT`` followed by a mirror
of transmittance ``eta`` is a pure-loss channel of transmissivity
``chi = eta * exp(-gammaT)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom

from .config import TOL
from .errors import CutoffError, DomainError
from .fockcore import CompositeState

# "log 10" in the fiber conversion is read as the natural log: km per unit gammaT
KM_PER_GAMMAT = 20.0 / (0.2 * math.log(10.0))
C_FIBER = 2.0e8


def length_from_gammaT(gammaT: float) -> float:
    """Elementary link length in km for a loss exponent ``gammaT``."""
    if gammaT < 0:
        raise DomainError("gammaT must be non-negative")
    return KM_PER_GAMMAT * gammaT


def gammaT_from_length(L0_km: float) -> float:
    """Inverse of :func:`length_from_gammaT`."""
    if L0_km < 0:
        raise DomainError("length must be non-negative")
    return L0_km / KM_PER_GAMMAT


@dataclass(frozen=True)
class ChannelParams:
    """Loss parameters of one elementary link.

    ``L0_km`` is derived from ``gammaT``; use :meth:`from_length` to build
    from a distance.
    """

    gammaT: float = 0.0
    eta: float = 1.0
    c_fiber: float = C_FIBER

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta={self.eta} outside [0, 1]")
        if self.gammaT < 0:
            raise DomainError("gammaT must be non-negative")

    @classmethod
    def from_length(cls, L0_km: float, eta: float = 1.0, c_fiber: float = C_FIBER) -> "ChannelParams":
        return cls(gammaT_from_length(L0_km), eta, c_fiber)

    @property
    def L0_km(self) -> float:
        return length_from_gammaT(self.gammaT)

    @property
    def chi(self) -> float:
        """Transmissivity ``eta * exp(-gammaT)``."""
        return self.eta * math.exp(-self.gammaT)


def attenuate(alpha: complex, p: ChannelParams) -> complex:
    """Coherent amplitude after the channel."""
    return complex(alpha) * math.sqrt(p.eta) * math.exp(-0.5 * p.gammaT)


def decoherence_factor(p: ChannelParams, phi: float, nbar: float) -> complex:
    """``F = exp{-nbar (1 - e^{-2i phi}) (1 - chi)}``."""
    return complex(np.exp(-nbar * (1.0 - np.exp(-2j * phi)) * (1.0 - p.chi)))


class FieldOverlap(NamedTuple):
    exact: float
    approx: float


def field_overlap_fstar(p: ChannelParams, g_tau: float, nbar: float) -> FieldOverlap:
    """Overlap modulus of the two attenuated field branches.

    ``exact`` is ``|exp{-chi nbar (1 - e^{-2i phi})}|`` and ``approx`` is its
    small-angle form ``exp(-chi (g tau)^2 / 2)``.
    """
    chi = p.chi
    phi = g_tau / (2.0 * math.sqrt(nbar)) if nbar > 0 else 0.0
    exact = abs(np.exp(-chi * nbar * (1.0 - np.exp(-2j * phi))))
    approx = math.exp(-chi * g_tau * g_tau / 2.0)
    return FieldOverlap(float(exact), approx)


# ---------------------------------------------------------------------------
# Kraus representation

def kraus_rank(chi: float, dim: int, defect: float = TOL.kraus_defect) -> int:
    """Number of Kraus operators needed for a completeness defect below ``defect``.

    Dropping ``K_k`` for ``k >= K`` removes ``P(Binom(n, 1-chi) >= K)`` of
    the trace from level ``n``; the worst level is ``n = dim - 1``.
    """
    if chi >= 1.0:
        return 1
    if chi <= 0.0:
        return dim
    sf = binom.sf(np.arange(dim), dim - 1, 1.0 - chi)
    ok = np.nonzero(sf < defect)[0]
    return int(ok[0]) + 1 if ok.size else dim


def _kraus_weights(chi: float, dim: int, k: int) -> np.ndarray:
    # sqrt(C(m+k, k) chi^m (1-chi)^k) for m = 0 .. dim-1-k
    m = np.arange(dim - k)
    if chi <= 0.0:
        return np.where(m == 0, 1.0, 0.0)
    if chi >= 1.0:
        return np.full(m.size, 1.0 if k == 0 else 0.0)
    lw = 0.5 * (gammaln(m + k + 1) - gammaln(m + 1) - gammaln(k + 1)
                + m * math.log(chi) + (k * math.log1p(-chi) if k else 0.0))
    return np.exp(lw)


def loss_kraus(chi: float, dim: int, rank: int | None = None) -> list[np.ndarray]:
    """Kraus operators ``K_k |m> = sqrt(C(m,k) chi^{m-k} (1-chi)^k) |m-k>``."""
    if not 0.0 <= chi <= 1.0:
        raise DomainError("chi outside [0, 1]")
    rank = kraus_rank(chi, dim) if rank is None else rank
    ops = []
    for k in range(rank):
        K = np.zeros((dim, dim))
        w = _kraus_weights(chi, dim, k)
        K[np.arange(dim - k), np.arange(k, dim)] = w
        ops.append(K)
    return ops


def apply_loss_vector(field: np.ndarray, chi: float, rank: int | None = None) -> list[np.ndarray]:
    """Apply each Kraus operator to the field axis (last) of a pure amplitude array.

    Returns one array per Kraus index; the mixture of their projectors is
    the channel output.
    """
    field = np.asarray(field, dtype=complex)
    dim = field.shape[-1]
    rank = kraus_rank(chi, dim) if rank is None else rank
    out = []
    for k in range(rank):
        w = _kraus_weights(chi, dim, k)
        v = np.zeros_like(field)
        v[..., : dim - k] = w * field[..., k:]
        out.append(v)
    return out


def amplitude_damping_channel(state: CompositeState, p: ChannelParams | float) -> CompositeState:
    """Pure-loss channel on the field (last subsystem) of ``state``.

    ``p`` is either :class:`ChannelParams` or a bare transmissivity.
    Returns a mixed state. The sum over Kraus indices is done along shifted
    diagonals, ``rho'_{mn} = sum_k w_k(m) w_k(n) rho_{m+k, n+k}``.
    """
    chi = p.chi if isinstance(p, ChannelParams) else float(p)
    dims = tuple(state.dims)
    dim = dims[-1]
    do = int(np.prod(dims[:-1])) if len(dims) > 1 else 1
    rho = state.density().reshape(do, dim, do, dim)
    top = np.einsum("ajaj->j", rho).real[-2:].sum()
    if top > TOL.cutoff_population:
        raise CutoffError(f"population {top:.2e} in the top two Fock levels")
    out = np.zeros_like(rho)
    for k in range(kraus_rank(chi, dim)):
        w = _kraus_weights(chi, dim, k)
        out[:, : dim - k, :, : dim - k] += (
            w[None, :, None, None] * rho[:, k:, :, k:] * w[None, None, None, :]
        )
    return CompositeState(dims, out.reshape(do * dim, do * dim), False)
