"""Closed-form repeater rate model.

A chain of ``n`` elementary links of length ``L0`` is built by generating
and purifying (``N`` rounds) pairs on every link in parallel, swapping in
``ceil(log2 n)`` nested rounds, and re-purifying at the end points until
the fidelity exceeds ``1 - eps``. The rate is

    R = 1 / (Nbar (T_link A_n + T_swap)),

where ``A_n`` is the expected maximum of ``n`` geometric variables with
success probability ``P = P_gen^{2^N} P_pur``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace, asdict
from functools import lru_cache

import numpy as np
from scipy.special import bernoulli, comb

from .channel import C_FIBER, ChannelParams, gammaT_from_length
from .config import TOL
from .entgen import P_GEN, link_state
from .errors import DomainError
from .purify import purify_n
from .swap import iterate_swaps, swap_rounds, x_from_fidelity

TWO_PI_MHZ = 2.0 * math.pi * 1e6


@dataclass(frozen=True)
class Hardware:
    """Cavity-QED timing constants (angular frequencies in rad/s).

    ``gamma`` (spontaneous decay) is stored for reference only; no decay is
    modeled.
    """

    name: str
    g: float
    kappa: float
    gamma: float
    c_fiber: float = C_FIBER

    @property
    def T_det(self) -> float:
        return 1.0 / self.kappa

    @classmethod
    def from_mhz(cls, name: str, g: float, kappa: float, gamma: float) -> "Hardware":
        return cls(name, g * TWO_PI_MHZ, kappa * TWO_PI_MHZ, gamma * TWO_PI_MHZ)


HARDWARE = {
    "ritter": Hardware.from_mhz("ritter", 5.0, 3.0, 3.0),
    "reimann": Hardware.from_mhz("reimann", 18.0, 0.4, 5.2),
    "casabone": Hardware.from_mhz("casabone", 1.0, 0.05, 11.5),
    "neuzner": Hardware.from_mhz("neuzner", 7.6, 2.8, 3.0),
}


@dataclass(frozen=True)
class RepeaterConfig:
    """One repeater chain.

    Attributes
    ----------
    n_links, L0_km, N_rounds
        Chain shape and per-link purification depth.
    nbar, g_tau, eta
        Generation parameters; ``x_link``/``y_link`` override the closed-form
        link state when given.
    eps
        Near-maximal entanglement threshold, ``F > 1 - eps``.
    p_gen
        Per-attempt success of the raw link (0.5 for cavity generation;
        the inner-chain round success for nested chains).
    fidelity_policy
        ``"threshold"`` treats purified links as having fidelity ``1 - eps``;
        ``"track"`` uses ``max(f_N, g_N)`` from the recurrence.
    endpoint
        Apply end-point re-purification.
    floor_km, floor_s
        Below ``floor_km`` every time scale (``T1``, ``T2``, a swap round) is
        ``floor_s``.
    t1_s, t2_s
        Explicit attempt times, used by nested chains.
    """

    n_links: int = 1
    L0_km: float = 0.3
    N_rounds: int = 1
    hardware: Hardware = HARDWARE["casabone"]
    nbar: float = 100.0
    g_tau: float = 4.0
    eta: float = 1.0
    eps: float = 1e-3
    x_link: float | None = None
    y_link: float | None = None
    p_gen: float = P_GEN
    fidelity_policy: str = "track"
    endpoint: bool = True
    floor_km: float = 2.0
    floor_s: float = 10e-6
    t1_s: float | None = None
    t2_s: float | None = None
    label: str = ""

    def __post_init__(self):
        if self.n_links < 1:
            raise DomainError("n_links must be >= 1")
        if self.N_rounds < 0:
            raise DomainError("N_rounds must be >= 0")
        if self.fidelity_policy not in ("threshold", "track"):
            raise DomainError(f"unknown fidelity policy {self.fidelity_policy!r}")
        if not 0.0 < self.p_gen <= 1.0:
            raise DomainError("p_gen must lie in (0, 1]")

    @property
    def L_km(self) -> float:
        return self.n_links * self.L0_km

    @property
    def gammaT(self) -> float:
        return gammaT_from_length(self.L0_km)

    @property
    def channel(self) -> ChannelParams:
        return ChannelParams(self.gammaT, self.eta, self.hardware.c_fiber)

    def link_xy(self) -> tuple[float, float]:
        if self.x_link is not None:
            return self.x_link, (0.0 if self.y_link is None else self.y_link)
        ls = link_state(self.channel, self.nbar, self.g_tau, warn=False)
        return ls.x, ls.y

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hardware"] = self.hardware.name
        return d


# ---------------------------------------------------------------------------
# timing

def _floored(cfg: RepeaterConfig) -> bool:
    return cfg.L0_km < cfg.floor_km


def t1(cfg: RepeaterConfig) -> float:
    """Attempt time ``1/g + 2/kappa + L0/c + T_det + L0/c``."""
    if cfg.t1_s is not None:
        return cfg.t1_s
    if _floored(cfg):
        return cfg.floor_s
    hw = cfg.hardware
    L = cfg.L0_km * 1e3
    return 1.0 / hw.g + 2.0 / hw.kappa + L / hw.c_fiber + hw.T_det + L / hw.c_fiber


def t2(cfg: RepeaterConfig) -> float:
    """Purification round time ``1/g + T_det + L0/c``."""
    if cfg.t2_s is not None:
        return cfg.t2_s
    if _floored(cfg):
        return cfg.floor_s
    hw = cfg.hardware
    return 1.0 / hw.g + hw.T_det + cfg.L0_km * 1e3 / hw.c_fiber


def t_link(cfg: RepeaterConfig) -> float:
    """``2^N T1 + (2^N - 1) T2``."""
    m = 2 ** cfg.N_rounds
    return m * t1(cfg) + (m - 1) * t2(cfg)


def t_swap_round(cfg: RepeaterConfig) -> float:
    if _floored(cfg):
        return cfg.floor_s
    hw = cfg.hardware
    return math.sqrt(2.0) / hw.g + 2.0 * hw.T_det + cfg.L0_km * 1e3 / hw.c_fiber


def t_swap(cfg: RepeaterConfig) -> float:
    """``ceil(log2 n)`` swap rounds."""
    return swap_rounds(cfg.n_links) * t_swap_round(cfg)


# ---------------------------------------------------------------------------
# average attempts

def harmonic(n: int) -> float:
    return math.fsum(1.0 / np.arange(1, n + 1))


def attempts_avg_binomial(n: int, P: float) -> float:
    """Alternating binomial form ``sum_i C(n,i)(-1)^{i+1} / (1-(1-P)^i)``.

    Suffers catastrophic cancellation for large ``n``; kept as a reference.
    """
    if not 0.0 < P <= 1.0:
        raise DomainError("P must lie in (0, 1]")
    log_q = math.log1p(-P) if P < 1.0 else -math.inf
    terms = []
    for i in range(1, n + 1):
        denom = -math.expm1(i * log_q) if P < 1.0 else 1.0
        terms.append((-1) ** (i + 1) * comb(n, i, exact=False) / denom)
    return math.fsum(terms)


@lru_cache(maxsize=64)
def _em_corrections(n: int, max_m: int = 41) -> tuple:
    # S_m = sum_i C(n,i) (-1)^i i^m for odd m; vanishes for m < n
    out = []
    B = bernoulli(max_m + 1)
    for m in range(1, max_m + 1, 2):
        if m < n:
            continue
        s = sum(math.comb(n, i) * (-1) ** i * i ** m for i in range(1, n + 1))
        out.append((m, float(B[m + 1]) / math.factorial(m + 1) * float(s)))
    return tuple(out)


def _attempts_em(n: int, lam: float) -> float:
    # Euler-Maclaurin for sum_{k>=0} h(k), h(k) = 1 - (1 - e^{-lam k})^n
    total = harmonic(n) / lam + 0.5
    if n <= 41:
        for m, cs in _em_corrections(n):
            term = cs * lam ** m
            total -= term
            if abs(term) < 1e-18 * total:
                break
    return total


def _attempts_series(n: int, lam: float, rel: float) -> float:
    log_q = -lam
    chunk = 1 << 16
    parts = [1.0]  # k = 0
    k0 = 1
    P = -math.expm1(log_q)
    while True:
        k = np.arange(k0, k0 + chunk, dtype=float)
        qk = np.exp(k * log_q)
        terms = -np.expm1(n * np.log1p(-qk))
        parts.append(math.fsum(terms))
        last = terms[-1]
        # remaining addends are bounded by a geometric tail last * q / P
        if last / P < rel * math.fsum(parts):
            break
        k0 += chunk
    return math.fsum(parts)


def attempts_avg(n: int, P: float, method: str = "auto") -> float:
    """Expected number of rounds until all ``n`` links have succeeded.

    Parameters
    ----------
    n : int
        Number of links.
    P : float
        Per-round success probability of one link.
    method : {"auto", "series", "euler_maclaurin", "binomial"}
        ``series`` sums ``sum_k [1 - (1 - q^k)^n]``; ``euler_maclaurin`` is
        its asymptotic form for tiny ``P``; ``auto`` picks by the number of
        series terms needed.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if not 0.0 < P <= 1.0:
        raise DomainError("P must lie in (0, 1]")
    if P == 1.0:
        return 1.0
    if method == "binomial":
        return attempts_avg_binomial(n, P)
    lam = -math.log1p(-P)
    if n == 1:
        return 1.0 / P
    if method == "auto":
        n_terms = (math.log(n) + 40.0) / lam
        method = "series" if n_terms < TOL.series_max_terms else "euler_maclaurin"
    if method == "series":
        return _attempts_series(n, lam, TOL.series_rel)
    if method == "euler_maclaurin":
        return _attempts_em(n, lam)
    raise DomainError(f"unknown method {method!r}")


def log_attempts_avg(n: int, log_P: float) -> float:
    """``ln A_n`` from ``ln P``, valid when ``P`` underflows."""
    if log_P > -700.0:
        return math.log(attempts_avg(n, math.exp(log_P)))
    # lam = -ln(1-P) = P to double precision; A_n = H_n / P + 1/2
    return math.log(harmonic(n)) - log_P


# ---------------------------------------------------------------------------
# end-point purification

def endpoint_overhead(F: float, eps: float = 1e-3, max_rounds: int = 64) -> tuple[int, float, float]:
    """Rounds needed to lift ``F`` above ``1 - eps``.

    Returns
    -------
    j : int
        Extra purification rounds.
    N_bar : float
        Average end-to-end pairs consumed, ``2^j / P_pur``.
    P_pur : float
        Overall success probability of the ``j`` rounds.
    """
    if F <= 0.5:
        raise DomainError(f"F={F} <= 1/2 cannot be purified")
    if F > 1.0 - eps:
        return 0, 1.0, 1.0
    x = x_from_fidelity(F)
    for j in range(1, max_rounds + 1):
        t = purify_n(x, 0.0, j)
        if t.fidelity > 1.0 - eps:
            return j, math.exp(j * math.log(2.0) - t.log_overall_prob), t.overall_prob
    raise DomainError(f"F={F} does not reach 1-eps within {max_rounds} rounds")


def repeaterless_bound(chi: float, L0_km: float, c_fiber: float = C_FIBER) -> float:
    """``-log2(1 - chi) c / (2 L0)`` pairs per second."""
    if not 0.0 <= chi < 1.0:
        raise DomainError("chi must lie in [0, 1)")
    return -math.log1p(-chi) / math.log(2.0) * c_fiber / (2.0 * L0_km * 1e3)


def benchmark_for_length(L_km: float, eta: float = 1.0, c_fiber: float = C_FIBER) -> float:
    """Repeaterless bound for a direct channel of length ``L_km``."""
    chi = eta * math.exp(-gammaT_from_length(L_km))
    return repeaterless_bound(chi, L_km, c_fiber)


# ---------------------------------------------------------------------------
# rate

@dataclass(frozen=True)
class RateReport:
    L_km: float
    T1: float
    T2: float
    T_link: float
    T_swap: float
    x_link: float
    F_link: float
    log_P: float
    P: float
    A_n: float
    log_A_n: float
    k_swaps: int
    F_after_swaps: float
    j_extra: int
    N_bar: float
    log_R: float
    R: float
    benchmark_rate: float
    F_final: float
    per_round_probs: tuple = field(default=())

    def to_dict(self) -> dict:
        return asdict(self)


def link_purification(cfg: RepeaterConfig):
    x, y = cfg.link_xy()
    return purify_n(x, y, cfg.N_rounds)


def repeater_rate(cfg: RepeaterConfig) -> RateReport:
    """Average rate of near-maximally entangled end-to-end pairs."""
    x, _ = cfg.link_xy()
    track = link_purification(cfg)
    log_P = (2 ** cfg.N_rounds) * math.log(cfg.p_gen) + track.log_overall_prob
    F_link = 1.0 - cfg.eps if cfg.fidelity_policy == "threshold" else track.fidelity
    k = swap_rounds(cfg.n_links)
    Fk = iterate_swaps(F_link, k)
    if cfg.endpoint:
        j, N_bar, _ = endpoint_overhead(Fk, cfg.eps)
        F_final = purify_n(x_from_fidelity(Fk), 0.0, j).fidelity if j else Fk
    else:
        j, N_bar, F_final = 0, 1.0, Fk
    T1, T2 = t1(cfg), t2(cfg)
    Tl = t_link(cfg)
    Ts = t_swap(cfg)
    log_A = log_attempts_avg(cfg.n_links, log_P)
    # log of T_link A_n + T_swap
    log_T = math.log(Tl) + log_A
    log_T = log_T + math.log1p(Ts / math.exp(log_T)) if log_T < 700 else log_T
    log_R = -(math.log(N_bar) + log_T)
    return RateReport(
        L_km=cfg.L_km, T1=T1, T2=T2, T_link=Tl, T_swap=Ts, x_link=x, F_link=F_link,
        log_P=log_P, P=math.exp(log_P), A_n=math.exp(log_A) if log_A < 700 else math.inf,
        log_A_n=log_A, k_swaps=k, F_after_swaps=Fk, j_extra=j, N_bar=N_bar, log_R=log_R,
        R=math.exp(log_R), benchmark_rate=benchmark_for_length(cfg.L_km, cfg.eta, cfg.hardware.c_fiber),
        F_final=F_final, per_round_probs=track.per_round_probs,
    )


def super_link(inner: RepeaterConfig, n_links: int, N_rounds: int = 1) -> RepeaterConfig:
    """Outer chain whose elementary links are copies of ``inner``.

    The inner chain acts as one link: an attempt is one inner round of
    duration ``T_link + T_swap`` plus the ``L0/c`` heralding delay, it
    succeeds with probability ``1 / A_n`` (inner), and the delivered pair
    has ``x = 2 F - 1`` with ``F`` the inner fidelity after swapping.
    """
    rep = repeater_rate(inner)
    L0 = inner.L_km
    hw = inner.hardware
    t1_outer = rep.T_link + rep.T_swap + L0 * 1e3 / hw.c_fiber
    t2_outer = 1.0 / hw.g + hw.T_det + L0 * 1e3 / hw.c_fiber
    return replace(
        inner,
        n_links=n_links,
        L0_km=L0,
        N_rounds=N_rounds,
        x_link=x_from_fidelity(rep.F_after_swaps),
        y_link=0.0,
        p_gen=1.0 / rep.A_n,
        t1_s=t1_outer,
        t2_s=t2_outer,
        label=(inner.label + "/super").lstrip("/"),
    )
