"""Parameter presets reproducing the rate figures.

Each preset is a list of (series label, list of :class:`RepeaterConfig`).
Fig. 6 presets use the ``threshold`` link-fidelity policy (links treated
as purified to ``1 - eps``); the others use the recurrence fidelity.
"""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from .errors import DomainError
from .rates import RepeaterConfig, super_link

FIGURES = ("3", "4", "5", "6a", "6b", "105km")


def _fig3():
    out = []
    grid = np.round(np.arange(0.1, 7.0 + 1e-9, 0.1), 10)
    for eta in (1.0, 0.8):
        for N in (1, 2, 3, 4):
            cfgs = [RepeaterConfig(1, float(L0), N, eta=eta, endpoint=False, label=f"eta={eta},N={N}")
                    for L0 in grid]
            out.append((f"eta={eta},N={N}", cfgs))
    return out


def _fig4():
    return [(f"N={N}", [RepeaterConfig(n, 3.5, N, x_link=-0.5, y_link=0.0, label=f"N={N}")
                        for n in range(1, 41)]) for N in (2, 4)]


def _fig5():
    return [(f"L0={L0}", [RepeaterConfig(n, L0, 3, x_link=x, y_link=0.0, label=f"L0={L0}")
                          for n in range(1, 31)]) for L0, x in ((3.5, -0.5), (7.0, 0.3))]


def fig6a_inner(n_links: int = 60) -> RepeaterConfig:
    return RepeaterConfig(n_links, 0.3, 1, fidelity_policy="threshold", label="L0=0.3")


def _fig6a():
    return [("L0=0.3", [fig6a_inner(n) for n in range(1, 61)])]


def _fig6b():
    inner = fig6a_inner(60)
    return [("L0=18", [super_link(inner, n) for n in range(1, 51)])]


def _fig105():
    return [("L=105", [RepeaterConfig(30, 3.5, 3, x_link=-0.5, y_link=0.0, label="L=105")])]


_BUILDERS = {"3": _fig3, "4": _fig4, "5": _fig5, "6a": _fig6a, "6b": _fig6b, "105km": _fig105}


def figure_configs(name: str):
    """Series of configurations for a figure preset."""
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise DomainError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}") from None


def apply_overrides(series, **kw):
    """Replace fields on every configuration of a preset."""
    kw = {k: v for k, v in kw.items() if v is not None}
    return [(lab, [replace(c, **kw) for c in cfgs]) for lab, cfgs in series]
