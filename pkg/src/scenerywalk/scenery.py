"""Deterministic heavy-tailed i.i.d. scenery on Z^d.

A scenery attaches a value z(x) >= 1 to every lattice site.  Site values are
pure functions of ``(seed, alpha, x)``: they are produced by a counter-based
hash of the packed coordinates, mapped through the exact Pareto inverse CDF

    P(z > r) = r^(-alpha)   for r >= 1.

Nothing is stored, so fields of any extent cost O(1) memory and are safe to
query concurrently and out of order.

Hash scheme (needed to reproduce fields bit-exactly elsewhere):

1. each signed coordinate c is zig-zag encoded to uint64:
   ``enc(c) = (c << 1) ^ (c >> 63)`` on two's-complement int64;
2. starting from ``h = splitmix64(seed)`` (the seed is mixed first so that
   nearby seeds give unrelated fields), fold coordinates in order with
   ``h = splitmix64(h XOR enc(c))`` where splitmix64 is the standard
   Steele-Lea-Flood finalizer;
3. the top 53 bits give a uniform ``u = ((h >> 11) + 1) * 2**-53`` in (0, 1];
4. the site value is ``u ** (-1/alpha)`` (u = 1 maps to the lower endpoint 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_MUL2 = np.uint64(0x94D049BB133111EB)

#: Reference marginal law implemented by :class:`SceneryField`.
PARETO_EXACT = "ParetoExact"

#: Enumeration guard above which :func:`level_set` refuses to materialise a box.
SITE_BUDGET = 1 << 24


class SiteBudgetError(RuntimeError):
    """Raised when a level-set enumeration would exceed :data:`SITE_BUDGET`."""


def _splitmix64(x: np.ndarray) -> np.ndarray:
    """Vectorised splitmix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    with np.errstate(over="ignore"):
        z = (x + _SM_GAMMA) & _MASK64
        z = (z ^ (z >> np.uint64(30))) * _SM_MUL1 & _MASK64
        z = (z ^ (z >> np.uint64(27))) * _SM_MUL2 & _MASK64
        return z ^ (z >> np.uint64(31))


def _zigzag(c: np.ndarray) -> np.ndarray:
    """Injective signed -> unsigned encoding, 0,-1,1,-2,2 -> 0,1,2,3,4."""
    c = c.astype(np.int64, copy=False)
    return ((c << np.int64(1)) ^ (c >> np.int64(63))).astype(np.uint64)


def site_uniforms(seed, sites) -> np.ndarray:
    """Uniform (0, 1] draws attached to lattice sites.

    ``sites`` is an integer array whose last axis runs over coordinates;
    ``seed`` is a uint64 scalar or an array broadcastable against the leading
    axes of ``sites`` (an array of seeds yields independent fields).
    """
    sites = np.asarray(sites)
    if sites.ndim == 0:
        sites = sites.reshape(1, 1)
    coords = _zigzag(sites)
    seed = _splitmix64(np.asarray(seed, dtype=np.uint64))
    shape = np.broadcast_shapes(seed.shape, coords.shape[:-1])
    h = np.broadcast_to(seed, shape).copy()
    for i in range(coords.shape[-1]):
        h = _splitmix64(h ^ coords[..., i])
    return ((h >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def pareto_from_uniform(u, alpha: float):
    """Inverse CDF of the exact Pareto law: u in (0, 1] -> u**(-1/alpha) >= 1."""
    return np.asarray(u, dtype=np.float64) ** (-1.0 / alpha)


@dataclass(frozen=True)
class SceneryField:
    """Lazily evaluated i.i.d. Pareto(alpha) field on Z^dim.

    Every site value is >= 1, finite, and bit-exactly reproducible from
    ``(seed, alpha, site)``.
    """

    alpha: float
    dim: int
    seed: int
    law: str = PARETO_EXACT

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if self.law != PARETO_EXACT:
            raise ValueError(f"unsupported scenery law {self.law!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    def values(self, sites) -> np.ndarray:
        """Field values at an array of sites (last axis = coordinates)."""
        sites = np.asarray(sites, dtype=np.int64)
        if sites.shape[-1] != self.dim:
            raise ValueError(f"expected sites with last axis {self.dim}, got {sites.shape}")
        return pareto_from_uniform(site_uniforms(np.uint64(self.seed), sites), self.alpha)

    def value_at(self, site) -> float:
        """Value at a single site (tuple or length-dim sequence)."""
        return float(self.values(np.asarray(site, dtype=np.int64).reshape(1, self.dim))[0])

    def to_config(self) -> dict:
        """Small structured record used by the CLI config."""
        return {"alpha": self.alpha, "dim": self.dim, "seed": int(self.seed), "law": self.law}

    @classmethod
    def from_config(cls, record: Mapping) -> "SceneryField":
        extra = set(record) - {"alpha", "dim", "seed", "law"}
        if extra:
            raise ValueError(f"unknown field-config keys: {sorted(extra)}")
        return cls(
            alpha=float(record["alpha"]),
            dim=int(record["dim"]),
            seed=int(record["seed"]),
            law=record.get("law", PARETO_EXACT),
        )


@dataclass(frozen=True)
class ConstantField:
    """Degenerate scenery z == value, used for law overrides in oracles."""

    value: float
    dim: int

    def values(self, sites) -> np.ndarray:
        sites = np.asarray(sites, dtype=np.int64)
        return np.full(sites.shape[:-1], float(self.value))

    def value_at(self, site) -> float:
        return float(self.value)


@dataclass(frozen=True)
class TableField:
    """Scenery backed by an explicit site -> value table (default elsewhere).

    Test double for enumeration examples; sites are coordinate tuples.
    """

    table: Mapping[tuple, float]
    dim: int
    default: float = 1.0

    def values(self, sites) -> np.ndarray:
        sites = np.asarray(sites, dtype=np.int64)
        flat = sites.reshape(-1, sites.shape[-1])
        out = np.array([self.table.get(tuple(int(c) for c in s), self.default) for s in flat])
        return out.reshape(sites.shape[:-1])

    def value_at(self, site) -> float:
        return float(self.table.get(tuple(int(c) for c in np.atleast_1d(site)), self.default))


@dataclass(frozen=True)
class LevelSet:
    """Sites in a centred box whose scenery value meets a threshold."""

    threshold: float
    box_radius: int
    sites: frozenset = field(default_factory=frozenset)

    def __contains__(self, site) -> bool:
        return tuple(site) in self.sites

    def __len__(self) -> int:
        return len(self.sites)


def box_sites(radius: int, dim: int) -> np.ndarray:
    """All lattice sites with sup-norm <= radius, lexicographically ordered."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    side = np.arange(-radius, radius + 1, dtype=np.int64)
    n = (2 * radius + 1) ** dim
    if n > SITE_BUDGET:
        raise SiteBudgetError(f"box with {n} sites exceeds budget {SITE_BUDGET}")
    grids = np.meshgrid(*([side] * dim), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def sample_site(field, x) -> float:
    """Scenery value at site ``x`` (deterministic in (seed, x))."""
    return field.value_at(x)


def box_max(field, radius: int) -> tuple[float, tuple]:
    """Maximum of z over the sup-norm ball of given radius.

    Ties are broken towards the lexicographically smallest site, so the
    argmax is deterministic.
    """
    sites = box_sites(radius, field.dim)
    vals = field.values(sites)
    best = np.flatnonzero(vals == vals.max())[0]  # sites are in lex order
    return float(vals[best]), tuple(int(c) for c in sites[best])


def exceedance_prob(alpha: float, dim: int, radius: int, threshold: float) -> float:
    """Exact P(max of z over the box >= s) = 1 - (1 - s^(-alpha))^N.

    ``N = (2 radius + 1)^dim`` is the number of box sites; requires s >= 1.
    """
    if threshold < 1:
        raise ValueError(f"threshold must be >= 1, got {threshold}")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if threshold == 1:
        return 1.0
    n_sites = (2 * radius + 1) ** dim
    # expm1/log1p keep precision when s^(-alpha) is tiny
    return float(-np.expm1(n_sites * np.log1p(-threshold ** (-alpha))))


def level_set(field, box_radius: int, threshold: float) -> LevelSet:
    """Exact enumeration of {x : z(x) >= threshold, |x|_inf <= box_radius}."""
    if threshold < 1:
        raise ValueError(f"threshold must be >= 1, got {threshold}")
    sites = box_sites(box_radius, field.dim)
    vals = field.values(sites)
    keep = sites[vals >= threshold]
    return LevelSet(
        threshold=float(threshold),
        box_radius=int(box_radius),
        sites=frozenset(tuple(int(c) for c in s) for s in keep),
    )
