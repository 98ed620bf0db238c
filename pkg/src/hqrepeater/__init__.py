"""Hybrid quantum repeater based on cavity QED and coherent-state postselection.

Submodules
----------
fockcore   truncated Fock-space states, operators and projectors
dynamics   one- and two-qubit resonant interactions with a cavity mode
channel    lossy fiber and mirror acting on coherent branches
entgen     heralded entanglement generation
purify     recurrence purification
swap       two-cavity Bell measurement and the swap fidelity map
rates      closed-form repeater rate
mcsim      Monte Carlo simulation of the repeater strategy
checks     oracle-versus-analytic equivalence checks
presets    figure parameter presets
"""
from importlib import metadata as _md

from .config import TOL, Tolerances
from .errors import CutoffError, DomainError, HQRError, NumericsError, RegimeWarning
from .fockcore import (
    CompositeState, bell_state, coherent_overlap, concurrence, default_dim, make_coherent,
    partial_trace, quad_halfline_projector,
)
from .dynamics import JcmParams, TcmParams, jcm_approx, jcm_exact, tcm_approx, tcm_exact
from .channel import ChannelParams, amplitude_damping_channel, decoherence_factor, field_overlap_fstar
from .entgen import LinkState, generation_oracle, interaction_window, link_state
from .purify import PurificationTrack, purify_n, purify_oracle_step, purify_step
from .swap import bell_measurement_analytic, bell_measurement_oracle, iterate_swaps, swap_fidelity_map
from .rates import HARDWARE, Hardware, RateReport, RepeaterConfig, attempts_avg, repeater_rate, super_link
from .mcsim import McSummary, TrialRecord, geometric_sample, simulate_chain

try:
    __version__ = _md.version("artifact")
except _md.PackageNotFoundError:  # pragma: no cover
    __version__ = "0.1.0"
