"""Vectorised replica-batch kernels behind the Monte Carlo estimators.

These produce the same processes as the event-driven simulators in ``ctrw``
(exponential holding times, uniform neighbour choices) but march whole
replica batches through numpy, which is what makes the desk-scale acceptance
runs feasible.

Randomness comes from Philox streams keyed by (master seed, kernel tag,
chunk index) with a fixed chunk size; inside a stream chunk the rows are
processed in memory-bounded sub-batches that consume the stream in a fixed
order.  Results are therefore bit-reproducible and independent of the
parallelism degree.
"""

from __future__ import annotations

import numpy as np

from . import scenery
from .streams import chunk_ranges, philox

#: cap on rows*jumps elements held per sub-batch (keeps peak memory ~100 MB)
_ELEMENT_BUDGET = 2_500_000


def _jump_capacity(rate: float, t: float) -> int:
    """Jump columns so that running out before the horizon is negligible."""
    mean_jumps = rate * t
    return int(np.ceil(mean_jumps + 12.0 * np.sqrt(mean_jumps + 1.0) + 30.0))


def _sub_batches(rows: int, m: int) -> list[int]:
    size = max(16, _ELEMENT_BUDGET // max(m, 1))
    out = []
    left = rows
    while left > 0:
        take = min(size, left)
        out.append(take)
        left -= take
    return out


def srw_paths_batch(
    dim: int, rate: float, t: float, count: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Batch of CTSRW sojourn sequences truncated at time t.

    Returns ``(pos, dur)``: occupied sites ``pos int32 (count, m, dim)`` and
    clipped sojourn durations ``dur (count, m)`` with ``dur.sum(1) == t`` per
    replica.  The walk starts at the origin; ``pos[:, j]`` is the site held
    during the j-th sojourn.
    """
    m = _jump_capacity(rate, t)
    holds = rng.exponential(1.0 / rate, size=(count, m))
    total = holds.sum(axis=1)
    while np.any(total < t):  # pragma: no cover - probability < 1e-18
        extra = rng.exponential(1.0 / rate, size=(count, m // 2 + 1))
        holds = np.concatenate([holds, extra], axis=1)
        total = holds.sum(axis=1)
        m = holds.shape[1]
    jump_times = np.cumsum(holds, axis=1)
    np.minimum(jump_times, t, out=jump_times)
    dur = np.empty_like(jump_times)
    dur[:, 0] = jump_times[:, 0]
    np.subtract(jump_times[:, 1:], jump_times[:, :-1], out=dur[:, 1:])

    pos = np.zeros((count, m, dim), dtype=np.int32)
    if dim == 1:
        steps = rng.integers(0, 2, size=(count, m - 1), dtype=np.int8)
        steps = steps.astype(np.int32) * 2 - 1
        np.cumsum(steps, axis=1, out=pos[:, 1:, 0])
    else:
        coords = rng.integers(0, dim, size=(count, m - 1))
        signs = rng.integers(0, 2, size=(count, m - 1), dtype=np.int8).astype(np.int32) * 2 - 1
        steps = np.zeros((count, m - 1, dim), dtype=np.int32)
        np.put_along_axis(steps, coords[:, :, None], signs[:, :, None], axis=2)
        np.cumsum(steps, axis=1, out=pos[:, 1:, :])
    return pos, dur


def endpoint_index(dur: np.ndarray) -> np.ndarray:
    """Index of the sojourn containing the horizon (last positive duration)."""
    return np.maximum((dur > 0).sum(axis=1) - 1, 0)


def pareto_values_at(seeds, pos: np.ndarray, alpha: float) -> np.ndarray:
    """Pareto(alpha) field values at batched positions, one field per row seed.

    For one-dimensional fields a value strip covering the batch range is
    hashed once per row and gathered, which is much cheaper than hashing
    every sojourn; higher dimensions hash positions directly.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    dim = pos.shape[-1]
    if dim == 1:
        lo = int(pos.min())
        hi = int(pos.max())
        strip_sites = np.arange(lo, hi + 1, dtype=np.int64)[None, :, None]
        u = scenery.site_uniforms(seeds[:, None], strip_sites)
        strip = scenery.pareto_from_uniform(u, alpha)
        return np.take_along_axis(strip, pos[..., 0].astype(np.int64) - lo, axis=1)
    u = scenery.site_uniforms(seeds[:, None], pos.astype(np.int64))
    return scenery.pareto_from_uniform(u, alpha)


def field_values_at(field, pos: np.ndarray) -> np.ndarray:
    """Values of a fixed field at batched positions (strip-gathered for d=1)."""
    dim = pos.shape[-1]
    if dim == 1 and hasattr(field, "seed"):
        lo = int(pos.min())
        hi = int(pos.max())
        strip = field.values(np.arange(lo, hi + 1, dtype=np.int64)[:, None])
        return strip[pos[..., 0].astype(np.int64) - lo]
    return field.values(pos.astype(np.int64))


def additive_functional_batch(
    alpha: float,
    dim: int,
    rate: float,
    t: float,
    master_seed: int,
    count: int,
    tag: int,
    site_weight=None,
) -> np.ndarray:
    """A_t = integral of z along the walk, one fresh scenery per replica.

    Walk randomness and field seeds both derive from (master_seed, tag,
    chunk).  ``site_weight(pos) -> (rows, m)`` overrides the Pareto field
    (degenerate-law oracles).
    """
    m = _jump_capacity(rate, t)
    out = np.empty(count)
    for c, (lo, hi) in enumerate(chunk_ranges(count)):
        rng = philox(master_seed, tag, c)
        field_seeds = philox(master_seed, tag, c, 0xF1E1D).integers(
            0, 2**63, size=hi - lo, dtype=np.uint64
        )
        row = lo
        for rows in _sub_batches(hi - lo, m):
            pos, dur = srw_paths_batch(dim, rate, t, rows, rng)
            if site_weight is not None:
                z = site_weight(pos)
            else:
                z = pareto_values_at(field_seeds[row - lo : row - lo + rows], pos, alpha)
            out[row : row + rows] = np.einsum("ij,ij->i", z, dur)
            row += rows
    return out


def occupation_batch(
    dim: int,
    rate: float,
    t: float,
    master_seed: int,
    count: int,
    tag: int,
    indicator,
    start=None,
) -> np.ndarray:
    """Occupation times int_0^t f(S_u) du per replica for an indicator f.

    ``indicator(pos)`` maps the (rows, m, dim) position array to sojourn
    weights in {0, 1}; ``start`` shifts the walk's starting site.
    """
    m = _jump_capacity(rate, t)
    out = np.empty(count)
    shift = None if start is None else np.asarray(start, dtype=np.int32).reshape(1, 1, dim)
    for c, (lo, hi) in enumerate(chunk_ranges(count)):
        rng = philox(master_seed, tag, c)
        row = lo
        for rows in _sub_batches(hi - lo, m):
            pos, dur = srw_paths_batch(dim, rate, t, rows, rng)
            if shift is not None:
                pos = pos + shift
            out[row : row + rows] = np.einsum(
                "ij,ij->i", indicator(pos).astype(np.float64), dur
            )
            row += rows
    return out


def srw_endpoints_batch(
    dim: int, rate: float, t: float, master_seed: int, count: int, tag: int
) -> np.ndarray:
    """Positions S_t of the CTSRW for ``count`` replicas, shape (count, dim)."""
    m = _jump_capacity(rate, t)
    out = np.empty((count, dim), dtype=np.int64)
    for c, (lo, hi) in enumerate(chunk_ranges(count)):
        rng = philox(master_seed, tag, c)
        row = lo
        for rows in _sub_batches(hi - lo, m):
            pos, dur = srw_paths_batch(dim, rate, t, rows, rng)
            k = endpoint_index(dur)
            out[row : row + rows] = pos[np.arange(rows), k].astype(np.int64)
            row += rows
    return out


def vsrw_endpoints_batch(field, t: float, master_seed: int, count: int, tag: int) -> np.ndarray:
    """Endpoints X_t of the layered VSRW for ``count`` replicas (fixed field).

    Synchronous event-driven stepping: all active replicas advance one jump
    per iteration with site-dependent exponential clocks; rows are dropped
    as they pass the horizon.
    """
    d = field.dim
    out = np.empty((count, 1 + d), dtype=np.int64)
    for c, (lo, hi) in enumerate(chunk_ranges(count, 16384)):
        rng = philox(master_seed, tag, c)
        n = hi - lo
        pos = np.zeros((n, 1 + d), dtype=np.int64)
        clock = np.zeros(n)
        idx = np.arange(n)
        final = np.empty((n, 1 + d), dtype=np.int64)
        while idx.size:
            z = field.values(pos[:, 1:])
            rate = 2.0 * z + 2.0 * d
            clock = clock + rng.exponential(1.0, size=idx.size) / rate
            done = clock > t
            if np.any(done):
                final[idx[done]] = pos[done]
                keep = ~done
                pos, clock, idx = pos[keep], clock[keep], idx[keep]
                z, rate = z[keep], rate[keep]
                if not idx.size:
                    break
            u = rng.random(idx.size) * rate
            vertical = u < 2.0 * z
            if np.any(vertical):
                rows = np.flatnonzero(vertical)
                pos[rows, 0] += np.where(u[rows] < z[rows], 1, -1)
            trans = np.flatnonzero(~vertical)
            if trans.size:
                v = u[trans] - 2.0 * z[trans]
                k = np.minimum((v // 2.0).astype(np.int64), d - 1)
                sign = np.where(v - 2.0 * k < 1.0, 1, -1)
                pos[trans, 1 + k] += sign
        out[lo:hi] = final
    return out


def composed_endpoints_batch(field, t: float, master_seed: int, count: int, tag: int) -> np.ndarray:
    """Endpoints of (S1 at clock A2_t, S2_t): the time-change representation.

    The transverse walk S2 (per-edge rate 1, total 2d) is simulated
    explicitly and integrated against the field to get the clock value A2_t;
    the vertical rate-2 walk at clock time A is then placed exactly by
    thinning its jumps into independent Poisson(A) up and down counts.
    """
    d = field.dim
    m = _jump_capacity(2.0 * d, t)
    out = np.empty((count, 1 + d), dtype=np.int64)
    for c, (lo, hi) in enumerate(chunk_ranges(count)):
        rng = philox(master_seed, tag, c)
        row = lo
        for rows in _sub_batches(hi - lo, m):
            pos, dur = srw_paths_batch(d, 2.0 * d, t, rows, rng)
            z = field_values_at(field, pos)
            a2 = np.einsum("ij,ij->i", z, dur)
            x1 = rng.poisson(a2) - rng.poisson(a2)
            out[row : row + rows, 0] = x1
            k = endpoint_index(dur)
            out[row : row + rows, 1:] = pos[np.arange(rows), k].astype(np.int64)
            row += rows
    return out
