"""Additive functional A_t, clock processes, local times and level slicing.

All operations here are exact path functionals: sojourn intervals are summed
with ``math.fsum`` so the partition identities (sum of local times = t,
A_t = sum z * local time) hold to full double precision even when the
heavy-tailed slopes span many orders of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class ClockProcess:
    """Piecewise-linear nondecreasing clock A_u = int_0^u z(S_s) ds.

    ``times`` are the breakpoints (starting at 0), ``cumulative`` the clock
    values there, ``slopes[i]`` the z-value on [times[i], times[i+1]) (the
    last slope extends to the horizon).
    """

    times: np.ndarray
    cumulative: np.ndarray
    slopes: np.ndarray
    horizon: float

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=np.float64))
        object.__setattr__(self, "cumulative", np.asarray(self.cumulative, dtype=np.float64))
        object.__setattr__(self, "slopes", np.asarray(self.slopes, dtype=np.float64))

    @property
    def breakpoints(self) -> list[tuple[float, float]]:
        return list(zip(self.times.tolist(), self.cumulative.tolist()))

    def value(self, u: float) -> float:
        """Clock value A_u for u in [0, horizon]."""
        if not 0 <= u <= self.horizon:
            raise ValueError(f"time {u} outside [0, {self.horizon}]")
        i = int(np.searchsorted(self.times, u, side="right")) - 1
        return float(self.cumulative[i] + self.slopes[i] * (u - self.times[i]))

    def inverse(self, a: float) -> float:
        """First passage time of the clock over level a (slopes > 0)."""
        if not 0 <= a <= self.value(self.horizon):
            raise ValueError(f"clock level {a} outside [0, {self.value(self.horizon)}]")
        i = int(np.searchsorted(self.cumulative, a, side="right")) - 1
        i = min(i, self.slopes.size - 1)
        return float(self.times[i] + (a - self.cumulative[i]) / self.slopes[i])

    def validate(self) -> None:
        if self.times[0] != 0 or self.cumulative[0] != 0:
            raise ValueError("clock must start at (0, 0)")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("breakpoint times must increase strictly")
        if np.any(np.diff(self.cumulative) < 0) or np.any(self.slopes < 0):
            raise ValueError("clock must be nondecreasing")


@dataclass(frozen=True)
class FunctionalRecord:
    """Exact A_t, per-site local times and range of a walk up to time t."""

    horizon: float
    a_value: Optional[float]
    local_times: dict
    max_range: int

    def total_local_time(self) -> float:
        return math.fsum(self.local_times.values())


def _sojourns(path, t: float) -> tuple[np.ndarray, np.ndarray]:
    """(sites, durations) of the sojourn decomposition of [0, t]."""
    if not 0 <= t <= path.horizon:
        raise ValueError(f"t={t} outside the simulated horizon {path.horizon}")
    times = np.concatenate([[0.0], path.jump_times, [path.horizon]])
    clipped = np.minimum(times, t)
    dur = np.diff(clipped)
    sites = path.site_sequence()
    keep = dur > 0
    # keep the initial sojourn even if t == 0
    if not keep.any():
        keep[0] = True
    return sites[keep], dur[keep]


def clock(field, path) -> ClockProcess:
    """Exact clock process of the scenery along a walk path."""
    sites = path.site_sequence()
    z = np.atleast_1d(field.values(sites))
    times = np.concatenate([[0.0], path.jump_times])
    increments = z[:-1] * np.diff(times)
    cumulative = np.concatenate([[0.0], np.cumsum(increments)])
    return ClockProcess(times=times, cumulative=cumulative, slopes=z, horizon=path.horizon)


def local_times(path, t: float, field=None) -> FunctionalRecord:
    """Per-site occupation times up to t, with A_t when a field is given.

    The sojourn sums are fsum-accumulated per site, so
    sum_x l_t(x) == t and A_t == sum_x z(x) l_t(x) hold to double precision.
    """
    sites, dur = _sojourns(path, t)
    acc: dict[tuple, list] = {}
    for s, w in zip(map(tuple, sites.tolist()), dur.tolist()):
        acc.setdefault(s, []).append(w)
    ell = {s: math.fsum(ws) for s, ws in acc.items()}
    a_value = None
    if field is not None:
        z = np.atleast_1d(field.values(sites))
        a_value = math.fsum(zi * wi for zi, wi in zip(z.tolist(), dur.tolist()))
    max_range = int(np.max(np.abs(sites))) if sites.size else 0
    return FunctionalRecord(horizon=t, a_value=a_value, local_times=ell, max_range=max_range)


def default_level_count(alpha: float, dim: int, mu: float, epsilon: float) -> int:
    """Number K of nonempty level sets: floor(d mu / (epsilon alpha))."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return int(np.floor(dim * mu / (epsilon * alpha)))


def level_occupations(field, path, t: float, epsilon: float, K: int) -> np.ndarray:
    """Occupation times of the level-set slices, entry k for k = 0..K.

    Slice k holds the time spent at sites with t^(k eps) <= z < t^((k+1) eps);
    the top entry aggregates everything at or above t^(K eps) so the vector
    always sums to t.  For the two-sided reconstruction bound on A_t, K must
    be large enough that no visited site reaches t^((K+1) eps).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if K < 0:
        raise ValueError("K must be >= 0")
    if t <= 1:
        raise ValueError("level slicing needs t > 1")
    sites, dur = _sojourns(path, t)
    z = np.atleast_1d(field.values(sites))
    thresholds = t ** (epsilon * np.arange(K + 1, dtype=np.float64))
    idx = np.searchsorted(thresholds, z, side="right") - 1
    idx = np.clip(idx, 0, K)
    out = np.zeros(K + 1)
    np.add.at(out, idx, dur)
    return out
