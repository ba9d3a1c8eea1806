"""Monte Carlo estimators and verifiers for the desk-checkable claims.

Covers the strong law for A_t/t, the heavy-tail scaling exponent of A_t,
polynomial-regime tail scans, the quenched lower-bound strategy, the
non-asymptotic occupation bounds (Chen-type tail and the factorial moment
bound), and the level-set occupation growth.

Stretched-exponential regimes are deliberately not sampled (their
probabilities are unreachable by direct frequency estimation); requests in
those regimes raise :class:`StretchedRegimeError`.  Every estimator is
reproducible bit-exactly from (master seed, parameters): randomness flows
through keyed Philox streams only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import ive

from . import _kernels, exponents
from .scenery import SceneryField, box_sites
from .stats import (
    SlopeFit,
    TailEstimate,
    Z95,
    loglog_slope,
    tail_estimate,
    two_sample_chisquare,
    ChiSquareResult,
)

#: total jump rate of the scenery walk (generator (2d)^-1 Delta convention)
RWRS_RATE = 1.0


class StretchedRegimeError(RuntimeError):
    """Raised when direct sampling of a stretched-exponential tail is requested.

    Those probabilities decay like exp(-t^p) and cannot be measured by
    frequency estimation; use the exponent algebra and
    :func:`strategy_lower_bound` instead.
    """


def _origin_indicator(pos: np.ndarray) -> np.ndarray:
    return np.all(pos == 0, axis=-1)


def _site_set_indicator(sites: Sequence[tuple]) -> Callable[[np.ndarray], np.ndarray]:
    arr = [np.asarray(s, dtype=np.int32).reshape(1, 1, -1) for s in sites]

    def indicator(pos: np.ndarray) -> np.ndarray:
        mask = np.zeros(pos.shape[:-1], dtype=bool)
        for s in arr:
            mask |= np.all(pos == s, axis=-1)
        return mask

    return indicator


# ---------------------------------------------------------------------------
# law of large numbers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LLNResult:
    mean: float
    stderr: float
    target: float
    replicas: int
    t: float
    alpha: float
    dim: int

    @property
    def ci_low(self) -> float:
        return self.mean - 3 * self.stderr

    @property
    def ci_high(self) -> float:
        return self.mean + 3 * self.stderr

    @property
    def within_3_sigma(self) -> bool:
        return abs(self.mean - self.target) <= 3 * self.stderr


def lln_check(
    alpha: float,
    dim: int,
    t: float,
    replicas: int,
    seed: int,
    law_override: Optional[float] = None,
) -> LLNResult:
    """Sample mean of A_t/t over fresh fields against the scenery mean.

    For the exact Pareto law the target is E[z] = alpha/(alpha-1), which
    requires alpha > 1.  ``law_override`` replaces the scenery by z == c
    (degenerate oracle with A_t/t == c exactly).
    """
    if law_override is None and alpha <= 1:
        raise ValueError("lln_check requires alpha > 1 (scenery mean must be finite)")
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    site_weight = None
    if law_override is not None:
        site_weight = lambda pos: np.full(pos.shape[:-1], float(law_override))
    a_vals = _kernels.additive_functional_batch(
        alpha, dim, RWRS_RATE, t, seed, replicas, tag=1, site_weight=site_weight
    )
    ratios = a_vals / t
    target = float(law_override) if law_override is not None else alpha / (alpha - 1)
    return LLNResult(
        mean=float(ratios.mean()),
        stderr=float(ratios.std(ddof=1) / np.sqrt(replicas)),
        target=target,
        replicas=replicas,
        t=t,
        alpha=alpha,
        dim=dim,
    )


# ---------------------------------------------------------------------------
# heavy-tail scaling of A_t
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingEstimate:
    slope: float
    stderr: float
    quantiles: tuple  # (t, quantile of A_t) pairs
    reference: float
    one_sided: bool  # True: reference is only an upper bound on the slope


def _map_indexed(fn, n: int, jobs: Optional[int]):
    """Evaluate fn(0..n-1) possibly thread-parallel; results in index order.

    Safe because every task derives its randomness from its own keyed
    streams, so the output is identical for any jobs value.
    """
    if not jobs or jobs <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=min(jobs, n)) as pool:
        return list(pool.map(fn, range(n)))


def scaling_exponent_estimate(
    alpha: float,
    dim: int,
    t_grid: Sequence[float],
    replicas: int,
    quantile: float,
    seed: int,
    law_override: Optional[float] = None,
    jobs: Optional[int] = None,
) -> ScalingEstimate:
    """Log-log slope of a quantile of A_t over a geometric t grid.

    For d = 1 the reference slope is the self-similar exponent
    (alpha+1)/(2 alpha); for d >= 2 the reference d/(2 alpha) is an upper
    bound only (reported one-sided).  Needs alpha <= 1 unless a degenerate
    law override is supplied.
    """
    t_grid = [float(t) for t in t_grid]
    if len(t_grid) < 5:
        raise ValueError("t_grid must be geometric with at least 5 points")
    if law_override is None and alpha > 1:
        raise ValueError("scaling_exponent_estimate covers the alpha <= 1 range")
    if not 0 < quantile < 1:
        raise ValueError("quantile must be in (0, 1)")
    site_weight = None
    if law_override is not None:
        site_weight = lambda pos: np.full(pos.shape[:-1], float(law_override))

    def one(i: int):
        a_vals = _kernels.additive_functional_batch(
            alpha, dim, RWRS_RATE, t_grid[i], seed, replicas, tag=1000 + i, site_weight=site_weight
        )
        return (t_grid[i], float(np.quantile(a_vals, quantile)))

    qs = _map_indexed(one, len(t_grid), jobs)
    fit = loglog_slope([q[0] for q in qs], [q[1] for q in qs])
    if dim == 1:
        reference, one_sided = (alpha + 1) / (2 * alpha), False
    else:
        reference, one_sided = dim / (2 * alpha), True
    if law_override is not None:
        reference, one_sided = 1.0, False
    return ScalingEstimate(fit.slope, fit.stderr, tuple(qs), reference, one_sided)


# ---------------------------------------------------------------------------
# polynomial-regime tail scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailScan:
    model: str
    estimates: tuple  # TailEstimate per grid point
    t_grid: tuple
    slope: Optional[SlopeFit]
    floor_exponent: float
    floor_ok: bool


def tail_prob_scan(
    model: str,
    alpha: float,
    dim: int,
    t_grid: Sequence[float],
    replicas: int,
    seed: int,
    rho: Optional[float] = None,
    delta: Optional[float] = None,
    gamma: Optional[float] = None,
    floor_exponent: Optional[float] = None,
    jobs: Optional[int] = None,
) -> TailScan:
    """Direct MC frequencies of the polynomial-regime events.

    ``model="rwrs"`` scans P(A_t >= t^rho) over fresh sceneries (the quenched
    probability averaged over environments); ``model="rcm"`` scans
    P(X_t = t^delta e_1 + t^gamma e) for one fixed environment derived from
    the master seed.  Parameters in a stretched-exponential regime are
    refused; frequencies are checked against the calibrated polynomial floor
    t^(-floor_exponent).
    """
    from .calibration import CALIBRATION

    t_grid = [float(t) for t in t_grid]
    if not t_grid or replicas < 1:
        raise ValueError("need a non-empty t grid and replicas >= 1")
    if floor_exponent is None:
        floor_exponent = CALIBRATION["polynomial_floor_exponent"]["value"]
    estimates = []
    if model == "rwrs":
        if rho is None:
            raise ValueError("rwrs scan needs rho")
        regime = exponents.p_exponent(alpha, rho, dim).regime
        if rho > 1 and regime not in (exponents.POLYNOMIAL,):
            raise StretchedRegimeError(
                f"(alpha={alpha}, rho={rho}, d={dim}) is in the {regime!r} regime; "
                "use exponents.p_exponent / strategy_lower_bound instead"
            )
        def one_rwrs(i: int):
            t = t_grid[i]
            a_vals = _kernels.additive_functional_batch(
                alpha, dim, RWRS_RATE, t, seed, replicas, tag=2000 + i
            )
            k = int(np.sum(a_vals >= t**rho))
            return tail_estimate(k, replicas, log_t=float(np.log(t)))

        estimates = _map_indexed(one_rwrs, len(t_grid), jobs)
    elif model == "rcm":
        if delta is None or gamma is None:
            raise ValueError("rcm scan needs delta and gamma")
        q_regime = exponents.q_closed_form(alpha, delta, dim).regime
        if not (q_regime == "first" and gamma <= 0.5):
            raise StretchedRegimeError(
                f"(alpha={alpha}, delta={delta}, gamma={gamma}, d={dim}) decays "
                "stretched-exponentially; use the exponent algebra instead"
            )
        from .chemdist import round_half_away

        field = SceneryField(alpha=alpha, dim=dim, seed=seed)

        def one_rcm(i: int):
            t = t_grid[i]
            target = np.zeros(1 + dim, dtype=np.int64)
            target[0] = round_half_away(t**delta)
            target[1] = round_half_away(t**gamma)
            ends = _kernels.composed_endpoints_batch(field, t, seed, replicas, tag=2500 + i)
            k = int(np.sum(np.all(ends == target, axis=1)))
            return tail_estimate(k, replicas, log_t=float(np.log(t)))

        estimates = _map_indexed(one_rcm, len(t_grid), jobs)
    else:
        raise ValueError(f"unknown tail scan model {model!r}")

    floor_ok = all(
        est.ci_low > t ** (-floor_exponent) for est, t in zip(estimates, t_grid)
    )
    positive = [(t, e.probability) for t, e in zip(t_grid, estimates) if e.probability > 0]
    slope = None
    if len(positive) >= 2:
        slope = loglog_slope([p[0] for p in positive], [p[1] for p in positive])
    return TailScan(
        model=model,
        estimates=tuple(estimates),
        t_grid=tuple(t_grid),
        slope=slope,
        floor_exponent=float(floor_exponent),
        floor_ok=bool(floor_ok),
    )


# ---------------------------------------------------------------------------
# quenched lower-bound strategy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StrategyBound:
    """Certified log-probability lower bound for P_0(A_t >= t^rho, S_t = 0)."""

    log_probability: float
    travel: float
    stay: float
    ret: float
    site: Optional[tuple]
    regime: str
    t: float
    rho: float

    @property
    def exponent(self) -> float:
        """log(-log bound)/log t: the measured decay exponent of the bound."""
        if not np.isfinite(self.log_probability):
            return float("inf")
        return float(np.log(-self.log_probability) / np.log(self.t))


_LOCAL_TIME_TAIL_CACHE: dict = {}
_LT_TAIL_SEED = 0x10CA17


def _local_time_tail(dim: int, rate: float, window: float, replicas: int = 200_000) -> np.ndarray:
    """Sorted MC sample of the origin local time over one window (cached)."""
    key = (dim, float(rate), round(float(window), 9), replicas)
    if key not in _LOCAL_TIME_TAIL_CACHE:
        occ = _kernels.occupation_batch(
            dim, rate, window, _LT_TAIL_SEED, replicas, tag=7100, indicator=_origin_indicator
        )
        _LOCAL_TIME_TAIL_CACHE[key] = np.sort(occ)
    return _LOCAL_TIME_TAIL_CACHE[key]


def _wilson_low_vec(k: np.ndarray, n: int) -> np.ndarray:
    p = k / n
    z = Z95
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return np.maximum(0.0, centre - half)


def _log_stay_prob(dim: int, rate: float, window: float, amounts: np.ndarray) -> np.ndarray:
    """Certified log lower bound for P(l_window(0) >= amount).

    Combines the exact continuous-stay bound exp(-rate * amount) with the
    Wilson 95% lower confidence bound of a cached MC sample of the local
    time; the larger of the two is used per amount.
    """
    samples = _local_time_tail(dim, rate, window)
    n = samples.size
    counts = n - np.searchsorted(samples, amounts, side="left")
    with np.errstate(divide="ignore"):
        log_mc = np.log(_wilson_low_vec(counts, n))
    log_exact = -rate * np.asarray(amounts)
    return np.maximum(log_mc, log_exact)


def _log_p_vec(dim: int, rate: float, s: float, sites: np.ndarray) -> np.ndarray:
    """log p_s(0, x) for an array of sites via the Bessel series.

    Sites beyond the reachable range underflow to -inf, which simply removes
    them from the bound maximisation.
    """
    u = rate * s / dim
    out = np.zeros(sites.shape[0])
    with np.errstate(divide="ignore"):
        for i in range(dim):
            out += np.log(ive(np.abs(sites[:, i]).astype(np.float64), u))
    return out


def strategy_lower_bound(
    alpha: float,
    dim: int,
    rho: float,
    t: float,
    field_seed: int,
    rate: float = RWRS_RATE,
    field=None,
) -> StrategyBound:
    """Computable lower bound for the bridge probability P(A_t >= t^rho, S_t = 0).

    Follows the peak strategy: travel to a high site x within t/4, leave
    local time t^rho/z(x) there inside the next t/4 window (second regime:
    hold x through the whole window), and return to the origin by t.  Travel
    and return legs use the exact Bessel transition probabilities; the stay
    factor is the certified bound of :func:`_log_stay_prob`.  The bound is
    maximised over the candidate sites of the t^mu search box, which at
    finite t can beat the plain box argmax.
    """
    regime = exponents.p_exponent(alpha, rho, dim).regime
    if regime not in ("first", "second"):
        raise ValueError(
            f"strategy_lower_bound needs the first or second regime, got {regime!r}"
        )
    if field is None:
        field = SceneryField(alpha=alpha, dim=dim, seed=field_seed)
    if regime == "first":
        mu = exponents.optimal_mu(alpha, rho, dim)
    else:
        mu = alpha * (rho - 1) / dim
    radius = max(1, int(np.ceil(t ** min(mu, 1.0) if regime == "first" else t**mu)))
    sites = box_sites(radius, dim)
    z = field.values(sites)

    log_travel = _log_p_vec(dim, rate, t / 4, sites)
    if regime == "first":
        lstar = t**rho / z
        feasible = lstar <= t / 4
        stay = _log_stay_prob(dim, rate, t / 4, lstar)
        log_ret = np.minimum(
            _log_p_vec(dim, rate, t / 2, sites), _log_p_vec(dim, rate, 3 * t / 4, sites)
        )
    else:
        feasible = z * (t / 4) >= t**rho
        stay = np.full(sites.shape[0], -rate * t / 4)
        log_ret = _log_p_vec(dim, rate, t / 2, sites)
    total = np.where(feasible, log_travel + stay + log_ret, -np.inf)
    best = int(np.argmax(total))
    if not np.isfinite(total[best]):
        return StrategyBound(-np.inf, -np.inf, -np.inf, -np.inf, None, regime, t, rho)
    return StrategyBound(
        log_probability=float(total[best]),
        travel=float(log_travel[best]),
        stay=float(stay[best]),
        ret=float(log_ret[best]),
        site=tuple(int(c) for c in sites[best]),
        regime=regime,
        t=t,
        rho=rho,
    )


# ---------------------------------------------------------------------------
# appendix bounds: Chen-type tail and factorial moment bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChenParams:
    """Inputs of the non-asymptotic occupation tail bound."""

    lam: float
    a_value: float
    b_value: float

    def __post_init__(self):
        if self.b_value <= 1:
            raise ValueError("b_value must exceed 1")
        if self.lam <= 0 or self.a_value <= 0:
            raise ValueError("lambda and a_value must be positive")


def chen_bound(params: ChenParams) -> float:
    """2^(1/2) e^(1/(24(b-1))) (lambda e / 4)^(-b+1)."""
    b = params.b_value
    return float(
        np.sqrt(2.0) * np.exp(1.0 / (24.0 * (b - 1.0))) * (params.lam * np.e / 4.0) ** (-b + 1.0)
    )


def local_time_samples(dim: int, t: float, replicas: int, seed: int, tag: int = 3000) -> np.ndarray:
    """MC sample of the origin local time l_t(0) of the rate-1 walk."""
    return _kernels.occupation_batch(
        dim, RWRS_RATE, t, seed, replicas, tag=tag, indicator=_origin_indicator
    )


@dataclass(frozen=True)
class ChenCheckRow:
    lam: float
    threshold: float
    estimate: TailEstimate
    bound: float

    @property
    def violated(self) -> bool:
        return self.estimate.probability > self.bound


@dataclass(frozen=True)
class ChenReport:
    t: float
    b_value: float
    a_value: float
    rows: tuple

    @property
    def n_violations(self) -> int:
        return sum(r.violated for r in self.rows)


def chen_verify(
    dim: int,
    t: float,
    b_value: float,
    replicas: int,
    seed: int,
    lambdas: Sequence[float] = (1.0, 2.0, 4.0, 6.0),
    samples: Optional[np.ndarray] = None,
) -> ChenReport:
    """Check MC tail frequencies of l_t(0) against the Chen-type bound.

    The hypothesis value a(t/b) is the MC estimate of E_0[l_{t/b}(0)] plus a
    3 sigma safety margin (f is the origin indicator, so the sup over the
    support is that single expectation).  ``samples`` lets callers reuse one
    l_t(0) batch across several b values; it must come from
    :func:`local_time_samples` with the same (dim, t, replicas, seed).
    """
    if b_value <= 1:
        raise ValueError("b_value must exceed 1")
    a_replicas = min(replicas, 200_000)
    base = _kernels.occupation_batch(
        dim,
        RWRS_RATE,
        t / b_value,
        seed,
        a_replicas,
        tag=3600 + int(round(b_value * 8)) + 64 * (int(round(t)) % 100_000),
        indicator=_origin_indicator,
    )
    a_value = float(base.mean() + 3 * base.std(ddof=1) / np.sqrt(a_replicas))
    if samples is None:
        samples = local_time_samples(dim, t, replicas, seed, tag=3000 + int(round(t)) % 100_000)
    occ = samples
    rows = []
    for lam in lambdas:
        thr = lam * a_value * b_value
        k = int(np.sum(occ >= thr))
        est = tail_estimate(k, occ.size, log_t=float(np.log(t)))
        rows.append(
            ChenCheckRow(
                lam=float(lam),
                threshold=float(thr),
                estimate=est,
                bound=chen_bound(ChenParams(lam=float(lam), a_value=a_value, b_value=float(b_value))),
            )
        )
    return ChenReport(t=t, b_value=float(b_value), a_value=a_value, rows=tuple(rows))


@dataclass(frozen=True)
class KhasminskiiReport:
    t: float
    m: int
    lhs: float
    rhs: float
    base_moment: float
    slack: float

    @property
    def violated(self) -> bool:
        return self.lhs > self.rhs


def khasminskii_verify(
    dim: int,
    t: float,
    m: int,
    replicas: int,
    seed: int,
    sites: Optional[Sequence[tuple]] = None,
) -> KhasminskiiReport:
    """Check the factorial moment bound E_x[(int f)^m] <= m! (sup E_x int f)^m.

    ``f`` is the indicator of a finite site set (default: the origin); the
    sup runs over the support sites.  The right-hand side carries a
    3 sigma statistical slack factor so sampling noise cannot flag a
    spurious violation of a true inequality.
    """
    if not 1 <= m <= 4:
        raise ValueError("moment order m must be in 1..4")
    if sites is None:
        sites = ((0,) * dim,)
    sites = [tuple(int(c) for c in s) for s in sites]
    indicator = _site_set_indicator(sites)
    sup_base, sup_base_rel = -np.inf, 0.0
    lhs, lhs_rel = -np.inf, 0.0
    for i, x in enumerate(sites):
        occ = _kernels.occupation_batch(
            dim, RWRS_RATE, t, seed, replicas, tag=4000 + 16 * m + i, indicator=indicator, start=x
        )
        base = occ.mean()
        if base > sup_base:
            sup_base = base
            sup_base_rel = occ.std(ddof=1) / np.sqrt(replicas) / base
        mom = (occ**m).mean()
        if mom > lhs:
            lhs = mom
            lhs_rel = (occ**m).std(ddof=1) / np.sqrt(replicas) / mom
    slack = 3.0 * (lhs_rel + m * sup_base_rel)
    rhs = math.factorial(m) * sup_base**m * (1.0 + slack)
    return KhasminskiiReport(
        t=t, m=m, lhs=float(lhs), rhs=float(rhs), base_moment=float(sup_base), slack=float(slack)
    )


# ---------------------------------------------------------------------------
# level-set occupation growth
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevelOccupationReport:
    means: tuple  # (t, mean over seeds of sup over starts of E_x[l_{t^eta}(H_k)])
    slope: SlopeFit
    reference_exponent: Optional[float]  # one-sided bound on the slope (d = 1)

    @property
    def within_bound(self) -> bool:
        if self.reference_exponent is None:
            return True
        return self.slope.slope <= self.reference_exponent + 0.1


def level_mean_occupation(
    alpha: float,
    dim: int,
    eta: float,
    k_eps: float,
    box_radius: int,
    t_grid: Sequence[float],
    seeds: Sequence[int],
    replicas: int,
    master_seed: int,
) -> LevelOccupationReport:
    """Growth in t of sup_x E_x[l_{t^eta}(H_k)] with H_k = {z >= t^(k eps)}.

    Hypothesis range: k_eps > eta/(2 alpha) for d = 1 and k_eps > eta/alpha
    for d >= 2 (k_eps = 0 is allowed as the trivial whole-lattice slice).
    The sup is approximated by the max over the starting sites of the
    ``box_radius`` box; means are taken per seed and averaged.  Reports the
    log-log slope against the one-sided reference eta/2 (d = 1).
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    if k_eps != 0:
        if dim == 1 and not k_eps > eta / (2 * alpha):
            raise ValueError(f"d=1 hypothesis needs k_eps > eta/(2 alpha) = {eta / (2 * alpha)}")
        if dim >= 2 and not k_eps > eta / alpha:
            raise ValueError(f"d>=2 hypothesis needs k_eps > eta/alpha = {eta / alpha}")
    t_grid = [float(t) for t in t_grid]
    starts = box_sites(box_radius, dim)
    means = []
    for ti, t in enumerate(t_grid):
        horizon = t**eta
        thr = t**k_eps
        per_seed = []
        for si, fseed in enumerate(seeds):
            fld = SceneryField(alpha=alpha, dim=dim, seed=int(fseed))
            indicator = lambda pos: _kernels.field_values_at(fld, pos) >= thr
            best = -np.inf
            for xi, x in enumerate(starts):
                occ = _kernels.occupation_batch(
                    dim,
                    RWRS_RATE,
                    horizon,
                    master_seed,
                    replicas,
                    tag=5_000_000 + 100_000 * ti + 100 * si + xi,
                    indicator=indicator,
                    start=x,
                )
                best = max(best, float(occ.mean()))
            per_seed.append(best)
        means.append((t, float(np.mean(per_seed))))
    positive = [(t, v) for t, v in means if v > 0]
    if len(positive) >= 2:
        slope = loglog_slope([p[0] for p in positive], [p[1] for p in positive])
    else:
        slope = SlopeFit(float("nan"), float("nan"), float("nan"), len(positive))
    reference = eta / 2 if dim == 1 else None
    return LevelOccupationReport(means=tuple(means), slope=slope, reference_exponent=reference)


# ---------------------------------------------------------------------------
# time-change distribution comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeChangeComparison:
    chi2: ChiSquareResult
    n_support: int
    replicas: int


def time_change_distribution_check(
    field,
    t: float,
    replicas: int,
    seed: int,
    significance: float = 0.01,
    mass: float = 0.99,
) -> TimeChangeComparison:
    """Two-sample chi-square between direct VSRW endpoints and the composed law.

    Endpoint samples of X_t from the event-driven VSRW and from the
    time-change representation (S1 at clock A2_t, S2_t) are binned on the
    sites carrying ``mass`` of the combined distribution (remainder pooled
    into one bin) and compared at the given significance.
    """
    direct = _kernels.vsrw_endpoints_batch(field, t, seed, replicas, tag=6000)
    composed = _kernels.composed_endpoints_batch(field, t, seed, replicas, tag=6001)
    both = np.concatenate([direct, composed], axis=0)
    uniq, inverse, counts = np.unique(both, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(counts)[::-1]
    cum = np.cumsum(counts[order])
    n_support = int(np.searchsorted(cum, mass * both.shape[0]) + 1)
    support = order[:n_support]
    bin_of = np.full(uniq.shape[0], n_support, dtype=np.int64)
    bin_of[support] = np.arange(n_support)
    labels = bin_of[inverse]
    c1 = np.bincount(labels[:replicas], minlength=n_support + 1)
    c2 = np.bincount(labels[replicas:], minlength=n_support + 1)
    chi = two_sample_chisquare(c1, c2, significance=significance)
    return TimeChangeComparison(chi2=chi, n_support=n_support, replicas=replicas)
