"""Chemical distance on the layered conductance graph of Z^(1+d).

Sites are written (x1, x2) with x1 in Z (the fast direction) and x2 in Z^d.
Edges along e_1 carry conductance z(x2), transverse edges conductance 1;
the chemical distance weighs an edge by 1/(sqrt(conductance) v 1), so
vertical edges cost z(x2)^(-1/2) <= 1 and transverse edges cost exactly 1.

Three evaluation routes of increasing speed, each checked against the one
below it:

* ``brute_force_distance`` enumerates all simple paths (tiny boxes only);
* ``chemical_distance`` runs Dijkstra on an explicit box;
* ``detour_distance`` uses the layered structure: the weight depends only on
  the transverse coordinate, so some optimal path does all its vertical
  moves at a single transverse site w, giving the exact closed search
      min over w of  |x2 - w|_1 + |w - y2|_1 + |x1 - y1| * z(w)^(-1/2).
  Any w whose transverse excess exceeds |x1 - y1| is dominated by the
  straight path, which bounds the search region.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .scenery import SITE_BUDGET, SceneryField, SiteBudgetError
from .stats import loglog_slope


def edge_weight(conductance: float) -> float:
    """Chemical edge weight 1/(sqrt(conductance) v 1)."""
    if conductance <= 0:
        raise ValueError(f"conductance must be positive, got {conductance}")
    return 1.0 / max(np.sqrt(conductance), 1.0)


@dataclass(frozen=True)
class LayeredGraphSpec:
    """Field plus a finite box of Z^(1+d) on which searches run.

    ``box`` is a tuple of (lo, hi) inclusive coordinate ranges, one per
    coordinate of Z^(1+d) (so len(box) == 1 + field.dim).
    """

    field: object
    box: tuple

    def __post_init__(self):
        if len(self.box) != 1 + self.field.dim:
            raise ValueError("box must have one (lo, hi) range per coordinate of Z^(1+d)")
        for lo, hi in self.box:
            if lo > hi:
                raise ValueError(f"empty box range ({lo}, {hi})")

    def contains(self, site) -> bool:
        return all(lo <= c <= hi for c, (lo, hi) in zip(site, self.box))

    def n_sites(self) -> int:
        n = 1
        for lo, hi in self.box:
            n *= hi - lo + 1
        return n

    def conductance(self, a: tuple, b: tuple) -> float:
        """Conductance of the edge between nearest neighbours a and b."""
        if a[0] != b[0]:
            return float(self.field.value_at(a[1:]))
        return 1.0

    def weight(self, a: tuple, b: tuple) -> float:
        return edge_weight(self.conductance(a, b))


@dataclass(frozen=True)
class ChemDistance:
    """Distance value plus whether the search box provably contains a geodesic."""

    value: float
    box_sufficient: bool


def l1(x, y) -> int:
    return int(np.sum(np.abs(np.asarray(x, dtype=np.int64) - np.asarray(y, dtype=np.int64))))


def sufficient_box(x, y) -> tuple:
    """Box whose restriction provably attains the unrestricted infimum.

    Extends the bounding box of {x, y} by 2 * |x - y|_1 in every direction;
    since all weights are <= 1, any path leaving it is longer than the
    straight monotone path.
    """
    margin = 2 * l1(x, y)
    return tuple((min(a, b) - margin, max(a, b) + margin) for a, b in zip(x, y))


def _box_contains_box(outer: tuple, inner: tuple) -> bool:
    return all(ol <= il and ih <= oh for (ol, oh), (il, ih) in zip(outer, inner))


def _neighbours(site: tuple, box: tuple):
    for i in range(len(site)):
        for s in (1, -1):
            c = site[i] + s
            lo, hi = box[i]
            if lo <= c <= hi:
                yield site[:i] + (c,) + site[i + 1 :]


def dijkstra_distance(box: tuple, weight: Callable[[tuple, tuple], float], x: tuple, y: tuple) -> float:
    """Shortest weighted path between x and y restricted to the box."""
    x, y = tuple(x), tuple(y)
    if x == y:
        return 0.0
    dist = {x: 0.0}
    heap = [(0.0, x)]
    while heap:
        d, site = heapq.heappop(heap)
        if site == y:
            return d
        if d > dist.get(site, np.inf):
            continue
        for nb in _neighbours(site, box):
            nd = d + weight(site, nb)
            if nd < dist.get(nb, np.inf):
                dist[nb] = nd
                heapq.heappush(heap, (nd, nb))
    return float("inf")


def dijkstra_all(box: tuple, weight: Callable[[tuple, tuple], float], x: tuple) -> dict:
    """Single-source distances from x to every box site (for metric checks)."""
    x = tuple(x)
    dist = {x: 0.0}
    done = set()
    heap = [(0.0, x)]
    while heap:
        d, site = heapq.heappop(heap)
        if site in done:
            continue
        done.add(site)
        for nb in _neighbours(site, box):
            nd = d + weight(site, nb)
            if nd < dist.get(nb, np.inf):
                dist[nb] = nd
                heapq.heappush(heap, (nd, nb))
    return dist


def chemical_distance(spec: LayeredGraphSpec, x, y) -> ChemDistance:
    """Exact chemical distance on the box graph of ``spec``.

    The value is the infimum over nearest-neighbour paths inside the box;
    ``box_sufficient`` is False when the box does not contain the
    safety margin of :func:`sufficient_box`, in which case the unrestricted
    infimum might be smaller.
    """
    x, y = tuple(int(c) for c in x), tuple(int(c) for c in y)
    if not (spec.contains(x) and spec.contains(y)):
        raise ValueError("x and y must lie inside the search box")
    if spec.n_sites() > SITE_BUDGET:
        raise SiteBudgetError(f"box with {spec.n_sites()} sites exceeds budget {SITE_BUDGET}")
    value = dijkstra_distance(spec.box, spec.weight, x, y)
    return ChemDistance(value=value, box_sufficient=_box_contains_box(spec.box, sufficient_box(x, y)))


def brute_force_distance(spec: LayeredGraphSpec, x, y, max_sites: int = 12) -> float:
    """Minimum over all simple paths by exhaustive search (oracle, tiny boxes)."""
    if spec.n_sites() > max_sites:
        raise ValueError(f"brute force is limited to boxes with <= {max_sites} sites")
    x, y = tuple(int(c) for c in x), tuple(int(c) for c in y)
    best = [np.inf]

    def walk(site, seen, cost):
        if cost >= best[0]:
            return
        if site == y:
            best[0] = cost
            return
        for nb in _neighbours(site, spec.box):
            if nb not in seen:
                walk(nb, seen | {nb}, cost + spec.weight(site, nb))

    walk(x, {x}, 0.0)
    return float(best[0])


def detour_distance(field, x, y) -> float:
    """Exact unrestricted chemical distance via the single-detour reduction.

    Valid because edge weights depend only on the transverse coordinate and
    vertical weights never exceed transverse ones (z >= 1); see module
    docstring.  Runs in time linear in the search region, which makes the
    scaling fits at large t feasible.
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    d = field.dim
    if x.size != 1 + d or y.size != 1 + d:
        raise ValueError("sites must live in Z^(1+d)")
    dx1 = abs(int(x[0] - y[0]))
    x2, y2 = x[1:], y[1:]
    base = int(np.abs(x2 - y2).sum())
    if dx1 == 0:
        return float(base)
    margin = dx1 // 2 + 1
    lo = np.minimum(x2, y2) - margin
    hi = np.maximum(x2, y2) + margin
    n = int(np.prod(hi - lo + 1))
    if n > SITE_BUDGET:
        raise SiteBudgetError(f"detour search over {n} sites exceeds budget {SITE_BUDGET}")
    if d == 1:
        w = np.arange(lo[0], hi[0] + 1, dtype=np.int64)[:, None]
    else:
        axes = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(lo, hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        w = np.stack([g.ravel() for g in mesh], axis=-1)
    z = field.values(w)
    excess = np.abs(w - x2).sum(axis=-1) + np.abs(w - y2).sum(axis=-1)
    cost = excess + dx1 / np.sqrt(z)
    return float(cost.min())


def round_half_away(v: float) -> int:
    """Closest lattice point with half-integers rounded away from zero."""
    return int(np.sign(v) * np.floor(abs(v) + 0.5))


@dataclass(frozen=True)
class ScalingFit:
    """Log-log slope of chemical distances over a t grid."""

    slope: float
    stderr: float
    rows: tuple  # (t, seed, distance) triples


def chemdist_scaling(
    alpha: float,
    dim: int,
    delta: float,
    gamma: float,
    t_grid: Sequence[float],
    seeds: Sequence[int],
    field_factory: Callable[[int], object] | None = None,
) -> ScalingFit:
    """Fit the growth exponent of d(0, t^delta e_1 + t^gamma e) in t.

    Targets are rounded to the closest lattice points (half away from zero);
    ``e`` is the first transverse direction.  Requires delta > 1/2 and a
    geometric grid with at least 5 points; returns the pooled log-log
    regression over all (t, seed) distances.  ``field_factory`` replaces the
    Pareto field constructor for degenerate-law oracles.
    """
    if delta <= 0.5:
        raise ValueError("chemdist_scaling requires delta > 1/2")
    t_grid = [float(t) for t in t_grid]
    if len(t_grid) < 5:
        raise ValueError("t_grid must contain at least 5 points")
    if field_factory is None:
        field_factory = lambda seed: SceneryField(alpha=alpha, dim=dim, seed=seed)
    rows = []
    origin = np.zeros(1 + dim, dtype=np.int64)
    for t in t_grid:
        target = np.zeros(1 + dim, dtype=np.int64)
        target[0] = round_half_away(t**delta)
        target[1] = round_half_away(t**gamma)
        for seed in seeds:
            dist = detour_distance(field_factory(int(seed)), origin, target)
            rows.append((t, int(seed), dist))
    fit = loglog_slope([r[0] for r in rows], [r[2] for r in rows])
    return ScalingFit(slope=fit.slope, stderr=fit.stderr, rows=tuple(rows))
