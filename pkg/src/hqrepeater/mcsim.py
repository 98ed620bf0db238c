"""Monte Carlo simulation of the repeater strategy.

One trial produces one near-maximally entangled end-to-end pair:

* a *chain round* runs all ``n`` links in parallel; link ``i`` needs a
  geometric number of attempts with success ``P`` (generation and
  ``N`` purification rounds, each attempt lasting ``T_link``), the round
  ends when the slowest link succeeds, then ``k`` swap rounds follow
  (``T_swap``);
* end-point purification spends ``2^j`` such pairs per attempt tree; every
  node of round ``k`` is accepted with probability ``P_(k)`` and the tree
  succeeds only if all its nodes do, otherwise all ``2^j`` pairs are
  discarded and a fresh tree is built.

Trials are grouped into fixed-size blocks. Block ``b`` draws from
``SeedSequence(seed).spawn(...)[b]`` and returns exact integer sums, so the
merged summary does not depend on the number of workers or on completion
order.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, astuple, dataclass, field

import numpy as np

from .errors import DomainError, RegimeWarning
from .purify import purify_n
from .rates import RepeaterConfig, link_purification, t_link, t_swap
from .swap import iterate_swaps, swap_rounds, x_from_fidelity

BLOCK_SIZE = 2048
MAX_ATOMS = 19


def geometric_sample(P: float, rng: np.random.Generator) -> int:
    """Number of Bernoulli(P) trials up to and including the first success."""
    if not 0.0 < P <= 1.0:
        raise DomainError("P must lie in (0, 1]")
    if P == 1.0:
        return 1
    return int(rng.geometric(P))


@dataclass
class TrialRecord:
    """Bookkeeping of one simulated trial.

    ``attempts_per_link`` lists, for every chain round, the attempts of each
    link; ``total_link_time`` sums ``T_link`` times the round maxima.
    """

    attempts_per_link: list
    total_link_time: float
    swap_time: float
    endpoint_pairs_used: int
    end_to_end_time: float
    final_fidelity: float


@dataclass(frozen=True)
class ChainPlan:
    """Everything a trial needs, derived once from a :class:`RepeaterConfig`."""

    n_links: int
    P: float
    T_link: float
    T_swap: float
    endpoint_probs: tuple
    F_after_swaps: float
    F_final: float


def chain_plan(cfg: RepeaterConfig) -> ChainPlan:
    track = link_purification(cfg)
    log_P = (2 ** cfg.N_rounds) * math.log(cfg.p_gen) + track.log_overall_prob
    P = math.exp(log_P)
    if P <= 0.0:
        raise DomainError("per-attempt success probability underflows; nothing to simulate")
    F_link = 1.0 - cfg.eps if cfg.fidelity_policy == "threshold" else track.fidelity
    Fk = iterate_swaps(F_link, swap_rounds(cfg.n_links))
    probs: tuple = ()
    F_final = Fk
    if cfg.endpoint and Fk <= 1.0 - cfg.eps:
        if Fk <= 0.5:
            raise DomainError(f"fidelity {Fk} after swapping cannot be purified")
        x = x_from_fidelity(Fk)
        j = 0
        while True:
            j += 1
            t = purify_n(x, 0.0, j)
            if t.fidelity > 1.0 - cfg.eps or j >= 64:
                break
        probs = t.per_round_probs
        F_final = t.fidelity
    return ChainPlan(cfg.n_links, P, t_link(cfg), t_swap(cfg), probs, Fk, F_final)


def _check_atoms(cfg: RepeaterConfig) -> bool:
    ok = 2 ** cfg.N_rounds <= MAX_ATOMS
    if not ok:
        warnings.warn(f"2^N = {2 ** cfg.N_rounds} exceeds {MAX_ATOMS} atoms per node", RegimeWarning,
                      stacklevel=3)
    return ok


# ---------------------------------------------------------------------------
# single-trial reference

def _tree_attempt(probs, rng) -> bool:
    j = len(probs)
    return all(rng.random() < p for k, p in enumerate(probs) for _ in range(2 ** (j - 1 - k)))


def _pairs_needed(probs, rng) -> int:
    # pairs consumed until one tree succeeds
    used = 0
    while True:
        used += 2 ** len(probs)
        if _tree_attempt(probs, rng):
            return used


def simulate_trial(cfg: RepeaterConfig, rng: np.random.Generator, plan: ChainPlan | None = None) -> TrialRecord:
    """One trial with explicit per-link draws (slow; for inspection and tests)."""
    plan = chain_plan(cfg) if plan is None else plan
    K = _pairs_needed(plan.endpoint_probs, rng)
    attempts = [[geometric_sample(plan.P, rng) for _ in range(plan.n_links)] for _ in range(K)]
    link_time = plan.T_link * sum(max(a) for a in attempts)
    swap_time = K * plan.T_swap
    return TrialRecord(attempts, link_time, swap_time, K, link_time + swap_time, plan.F_final)


# ---------------------------------------------------------------------------
# vectorized blocks

def _pairs_needed_vec(probs, size: int, rng) -> np.ndarray:
    j = len(probs)
    if j == 0:
        return np.ones(size, dtype=np.int64)
    log_p = math.fsum(2.0 ** (j - 1 - k) * math.log(p) for k, p in enumerate(probs))
    return (2 ** j) * rng.geometric(math.exp(log_p), size=size).astype(np.int64)


def _round_maxima(n: int, P: float, rounds: int, rng, chunk_elems: int = 1 << 22) -> np.ndarray:
    out = np.empty(rounds, dtype=np.int64)
    if P == 1.0:
        out[:] = 1
        return out
    step = max(1, chunk_elems // n)
    for s in range(0, rounds, step):
        e = min(rounds, s + step)
        out[s:e] = rng.geometric(P, size=(e - s, n)).max(axis=1)
    return out


@dataclass(frozen=True)
class BlockSums:
    """Exact integer moments of one block.

    ``S`` is the sum of round maxima in a trial and ``K`` its number of
    chain rounds; the trial time is ``T_link S + T_swap K``.
    """

    trials: int
    rounds: int
    sum_max: int
    sum_max2: int
    sum_S: int
    sum_S2: int
    sum_K: int
    sum_K2: int
    sum_SK: int

    def __add__(self, o: "BlockSums") -> "BlockSums":
        return BlockSums(*(a + b for a, b in zip(astuple(self), astuple(o))))


def _isum(a) -> int:
    return sum(int(v) for v in a)


def _isum_sq(a, b=None) -> int:
    b = a if b is None else b
    return sum(int(u) * int(v) for u, v in zip(a, b))


def run_block(plan: ChainPlan, trials: int, seed_seq: np.random.SeedSequence) -> BlockSums:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    K = _pairs_needed_vec(plan.endpoint_probs, trials, rng)
    rounds = int(K.sum())
    mx = _round_maxima(plan.n_links, plan.P, rounds, rng)
    starts = np.concatenate(([0], np.cumsum(K)[:-1]))
    S = np.add.reduceat(mx, starts)
    return BlockSums(trials, rounds, _isum(mx), _isum_sq(mx), _isum(S), _isum_sq(S),
                     _isum(K), _isum_sq(K), _isum_sq(S, K))


def _run_block_args(args):
    return run_block(*args)


@dataclass(frozen=True)
class McSummary:
    """Estimates with standard errors.

    ``metadata`` records the assumptions of the simulated strategy.
    """

    trials: int
    seed: int
    A_hat: float
    A_stderr: float
    R_hat: float
    R_stderr: float
    F_hat: float
    F_after_swaps: float
    pairs_per_trial: float
    rounds: int
    block_size: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def summarize(plan: ChainPlan, s: BlockSums, seed: int, block_size: int, metadata: dict) -> McSummary:
    r = s.rounds
    A = s.sum_max / r
    varA = max(s.sum_max2 / r - A * A, 0.0)
    A_se = math.sqrt(varA / r) if r > 1 else math.nan
    t = s.trials
    mS, mK = s.sum_S / t, s.sum_K / t
    vS = s.sum_S2 / t - mS * mS
    vK = s.sum_K2 / t - mK * mK
    cSK = s.sum_SK / t - mS * mK
    Tl, Ts = plan.T_link, plan.T_swap
    mean_T = Tl * mS + Ts * mK
    var_T = max(Tl * Tl * vS + 2.0 * Tl * Ts * cSK + Ts * Ts * vK, 0.0)
    R = 1.0 / mean_T
    R_se = math.sqrt(var_T / t) / mean_T ** 2 if t > 1 else math.nan
    return McSummary(t, seed, A, A_se, R, R_se, plan.F_final, plan.F_after_swaps, mK, r, block_size, metadata)


def simulate_chain(cfg: RepeaterConfig, trials: int, seed: int, workers: int = 1,
                   block_size: int = BLOCK_SIZE) -> McSummary:
    """Simulate ``trials`` end-to-end pairs.

    Parameters
    ----------
    cfg : RepeaterConfig
    trials : int
        Number of delivered end-to-end pairs.
    seed : int
        Root seed; the result is bit-identical for any ``workers``.
    workers : int
        Process count; 1 runs in-process.
    block_size : int
        Trials per independently seeded block. Changing it changes the
        random streams.

    Returns
    -------
    McSummary
        ``A_hat`` estimates the mean chain-round length ``A_n`` (in
        attempts), ``R_hat`` the rate in pairs per second.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if workers < 1:
        raise DomainError("workers must be >= 1")
    atoms_ok = _check_atoms(cfg)
    plan = chain_plan(cfg)
    n_blocks = -(-trials // block_size)
    seqs = np.random.SeedSequence(seed).spawn(n_blocks)
    sizes = [block_size] * (n_blocks - 1) + [trials - block_size * (n_blocks - 1)]
    args = [(plan, sz, sq) for sz, sq in zip(sizes, seqs)]
    if workers == 1:
        parts = list(map(_run_block_args, args))
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_block_args, args))
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    meta = {
        "unbounded_parallel_generation": True,
        "atoms_per_node_ok": atoms_ok,
        "P": plan.P,
        "T_link": plan.T_link,
        "T_swap": plan.T_swap,
        "endpoint_rounds": len(plan.endpoint_probs),
    }
    return summarize(plan, total, seed, block_size, meta)


def simulate_attempts(n: int, P: float, trials: int, seed: int) -> tuple[float, float]:
    """Sample mean and standard error of the maximum of ``n`` geometric(P) variables."""
    if trials < 1 or n < 1:
        raise DomainError("n and trials must be >= 1")
    if not 0.0 < P <= 1.0:
        raise DomainError("P must lie in (0, 1]")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    mx = _round_maxima(n, P, trials, rng)
    m = _isum(mx) / trials
    v = max(_isum_sq(mx) / trials - m * m, 0.0)
    return m, math.sqrt(v / trials) if trials > 1 else math.nan


__all__ = [
    "TrialRecord", "McSummary", "BlockSums", "ChainPlan", "chain_plan", "geometric_sample",
    "simulate_trial", "simulate_chain", "simulate_attempts", "run_block",
]
