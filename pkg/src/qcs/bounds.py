"""Closed-form convergence quantities and their exact walk oracle.

The completion analysis models every non-stationary token as a random
walker on the transmission chain.  This module computes the per-window
visit-probability lower bounds (plain and delayed), the number of
windows needed for a target confidence, the resulting completion-step
bounds, and the exact occupation probability of a single token, used to
machine-check the probability bounds on small graphs.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .digraph import Digraph, transmission_distribution

Rational = Union[int, float, Fraction]

# Exact confidence verification is skipped above this many windows; the
# float ceiling with the snap tolerance is then the final answer.
_EXACT_VERIFY_LIMIT = 4096
_CEIL_SNAP = 1e-9

# n above which the walk oracle switches from exact rationals to floats
_EXACT_WALK_LIMIT = 12


def _as_fraction(x: Rational) -> Fraction:
    """Exact rational view; floats convert via their decimal repr."""
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def visit_prob_bound(diam: int, max_out_degree: int) -> Fraction:
    """Lower bound on a token reaching any fixed node within one D-step window."""
    if diam < 1 or max_out_degree < 1:
        raise ValueError(
            f"need diam >= 1 and max_out_degree >= 1, got {diam}, {max_out_degree}"
        )
    return Fraction(1, (1 + max_out_degree) ** diam)


def visit_prob_bound_delayed(
    diam: int,
    max_out_degree: int,
    min_max_delay_prob: Rational,
) -> Fraction:
    """Delayed-walk analogue over a D*B window.

    The per-hop worst case charges both the uniform routing choice and
    the probability of drawing the maximum processing delay.
    """
    p = _as_fraction(min_max_delay_prob)
    if not 0 < p <= 1:
        raise ValueError(f"min_max_delay_prob must be in (0, 1], got {min_max_delay_prob}")
    return visit_prob_bound(diam, max_out_degree) * p**diam


def _windows_for(epsilon: Rational, per_window: Fraction) -> int:
    eps = _as_fraction(epsilon)
    if not 0 < eps < 1:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    if per_window >= 1:
        return 1  # degenerate: the visit is certain within one window
    if per_window <= 0:
        raise ValueError("per-window probability bound must be positive")
    quotient = math.log(float(eps)) / math.log(float(1 - per_window))
    tau = max(1, math.ceil(quotient - _CEIL_SNAP))
    # defensive +1 at representability boundaries: bump until the
    # confidence inequality (1-p)^tau <= eps verifiably holds
    if tau <= _EXACT_VERIFY_LIMIT:
        miss = 1 - per_window
        while miss**tau > eps:
            tau += 1
    return tau


def windows_for_confidence(epsilon: Rational, diam: int, max_out_degree: int) -> int:
    """Windows after which a token has visited a target with prob >= 1-epsilon."""
    return _windows_for(epsilon, visit_prob_bound(diam, max_out_degree))


def windows_for_confidence_delayed(
    epsilon: Rational,
    diam: int,
    max_out_degree: int,
    min_max_delay_prob: Rational,
) -> int:
    """Delayed-walk window count for confidence 1-epsilon."""
    return _windows_for(
        epsilon, visit_prob_bound_delayed(diam, max_out_degree, min_max_delay_prob)
    )


def target_quotient(y0: Sequence[int], z0: Sequence[int]) -> Fraction:
    """The exact agreement target: total initial mass over total tokens.

    The initialization doubling cancels in the ratio, so raw inputs and
    doubled inputs give the same quotient.
    """
    total_z = sum(z0)
    if total_z <= 0:
        raise ValueError("total token count must be positive")
    return Fraction(sum(y0), total_z)


def initial_state_error(y0: Sequence[int], quotient: Rational) -> int:
    """Total deviation mass driving the completion-step bounds.

    Sums how far raw initial masses sit above the ceiling of the target
    quotient plus how far they sit below its floor, exactly as the
    analysis defines it.
    """
    q = _as_fraction(quotient)
    hi = math.ceil(q)
    lo = math.floor(q)
    above = sum(v - hi for v in y0 if v > hi)
    below = sum(lo - v for v in y0 if v < lo)
    return above + below


def completion_step_bound(initial_error: int, n: int, windows: int, diam: int) -> int:
    """Step count after which termination holds with the stated confidence."""
    if initial_error < 0 or n < 1 or windows < 1 or diam < 1:
        raise ValueError("all bound inputs must be positive (initial_error >= 0)")
    num = (initial_error + n) * windows * diam
    return -(-num // diam) * diam + diam


def completion_step_bound_delayed(
    initial_error: int,
    n: int,
    windows: int,
    diam: int,
    max_delay: int,
) -> int:
    """Delayed analogue with D*B-step windows."""
    if max_delay < 1:
        raise ValueError(f"max_delay must be >= 1, got {max_delay}")
    window = diam * max_delay
    num = (initial_error + n) * windows * window
    return -(-num // window) * window + window


def token_walk_probability(
    g: Digraph,
    start: int,
    target: int,
    steps: int,
) -> Union[Fraction, float]:
    """Exact probability a single token sits at `target` after `steps` hops.

    The token moves per the uniform self-inclusive transmission
    distribution.  Exact rational arithmetic up to n=12; beyond that,
    float64 propagation of the start distribution.
    """
    if not (0 <= start < g.n and 0 <= target < g.n):
        raise ValueError(f"start/target must be node ids in 0..{g.n - 1}")
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if g.n <= _EXACT_WALK_LIMIT:
        rows = transmission_distribution(g).rows
        dist = [Fraction(0)] * g.n
        dist[start] = Fraction(1)
        for _ in range(steps):
            nxt = [Fraction(0)] * g.n
            for j, mass in enumerate(dist):
                if mass == 0:
                    continue
                for l, p in enumerate(rows[j]):
                    if p:
                        nxt[l] += mass * p
            dist = nxt
        return dist[target]
    trans = np.zeros((g.n, g.n), dtype=np.float64)
    for j in range(g.n):
        p = 1.0 / (1 + g.out_degrees[j])
        trans[j, j] = p
        trans[j, list(g.out_neighbors[j])] = p
    dist_f = np.zeros(g.n)
    dist_f[start] = 1.0
    for _ in range(steps):
        dist_f = dist_f @ trans
    return float(dist_f[target])


def bounds_report(
    g: Digraph,
    epsilon: Rational,
    y0: Sequence[int],
    z0: Sequence[int],
    max_delay: Optional[int] = None,
    min_max_delay_prob: Optional[Rational] = None,
) -> dict:
    """All closed-form quantities for one instance, JSON-ready.

    Delayed quantities appear when max_delay is given; the max-delay
    probability defaults to the uniform pmf value 1/max_delay.
    """
    quotient = target_quotient(y0, z0)
    err = initial_state_error(y0, quotient)
    diam = g.diameter
    deg = g.max_out_degree
    windows = windows_for_confidence(epsilon, diam, deg)
    report = {
        "n": g.n,
        "diameter": diam,
        "max_out_degree": deg,
        "epsilon": float(_as_fraction(epsilon)),
        "target_quotient": float(quotient),
        "initial_state_error": err,
        "visit_prob_bound": float(visit_prob_bound(diam, deg)),
        "windows": windows,
        "completion_step_bound": completion_step_bound(err, g.n, windows, diam),
    }
    if max_delay is not None:
        bp = Fraction(1, max_delay) if min_max_delay_prob is None else min_max_delay_prob
        windows_d = windows_for_confidence_delayed(epsilon, diam, deg, bp)
        report.update(
            {
                "max_delay": max_delay,
                "min_max_delay_prob": float(_as_fraction(bp)),
                "visit_prob_bound_delayed": float(visit_prob_bound_delayed(diam, deg, bp)),
                "windows_delayed": windows_d,
                "completion_step_bound_delayed": completion_step_bound_delayed(
                    err, g.n, windows_d, diam, max_delay
                ),
            }
        )
    return report
