"""Degree-two circle maps with non-uniform expansion.

Each map is described by a monotone lift ``F`` of ``[0, 1)`` (``F(x + 1) = F(x) + 2``)
made of smooth branches on ``[b_i, b_{i+1})``. Orbits record which branch was
used so the inverse branches can replay them. Small intervals are pulled back
by solving ``F(x + t) - F(x) = d`` with a cancellation-free difference formula;
once an interval drops below ``LOG_SWITCH`` it is propagated in log space with
the one-sided derivative at the orbit point.

Kinds
-----
doubling
    ``x -> 2x mod 1``.
intermittent(alpha)
    ``x (1 + 2**alpha x**alpha)`` on ``[0, 1/2)`` and ``2x - 1`` on ``[1/2, 1)``;
    0 is a neutral fixed point.
deformed(delta, kappa)
    Doubling deformed on the trap ``T = [0, delta)`` into ``delta * h(x / delta)``
    with ``h(u) = u + kappa / (2 pi) sin(2 pi u)``: T is invariant, 0 and delta
    repel, ``delta / 2`` attracts. ``[delta, 1/2)`` maps linearly onto
    ``[delta, 1)`` and ``[1/2, 1)`` onto ``[0, 1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numba import njit

from .errors import (EndpointAmbiguity, InsufficientData, InvalidParameter, StarViolation)
from .symbolic import SftSystem

DOUBLING, INTERMITTENT, DEFORMED = 0, 1, 2
LOG_SWITCH = math.log(1e-60)
TWO_PI = 2.0 * math.pi


# --- branch kernels ---------------------------------------------------------

@njit(cache=True)
def _branch_of(bps, x):
    nb = bps.shape[0] - 1
    for b in range(nb):
        if x < bps[b + 1]:
            return b
    return nb - 1


@njit(cache=True)
def _lift(kind, p, b, x):
    if kind == DOUBLING:
        return 2.0 * x
    if kind == INTERMITTENT:
        if b == 0:
            return x + 2.0 ** p[0] * abs(x) ** (1.0 + p[0]) * (1.0 if x >= 0 else -1.0)
        return 2.0 * x
    delta, kappa = p[0], p[1]
    if b == 0:
        u = x / delta
        return delta * (u + kappa / TWO_PI * math.sin(TWO_PI * u))
    if b == 1:
        return delta + (x - delta) * (1.0 - delta) / (0.5 - delta)
    return 2.0 * x


@njit(cache=True)
def _dlift(kind, p, b, x):
    if kind == DOUBLING:
        return 2.0
    if kind == INTERMITTENT:
        if b == 0:
            return 1.0 + (1.0 + p[0]) * 2.0 ** p[0] * abs(x) ** p[0]
        return 2.0
    delta, kappa = p[0], p[1]
    if b == 0:
        return 1.0 + kappa * math.cos(TWO_PI * x / delta)
    if b == 1:
        return (1.0 - delta) / (0.5 - delta)
    return 2.0


@njit(cache=True)
def _diff(kind, p, b, x, t):
    """F_b(x + t) - F_b(x) without cancellation."""
    if kind == DOUBLING:
        return 2.0 * t
    if kind == INTERMITTENT:
        if b == 1:
            return 2.0 * t
        a = p[0]
        if x <= 0.0 or x + t <= 0.0:
            return _lift(kind, p, b, x + t) - _lift(kind, p, b, x)
        return t + 2.0 ** a * x ** (1.0 + a) * math.expm1((1.0 + a) * math.log1p(t / x))
    delta, kappa = p[0], p[1]
    if b == 0:
        du = t / delta
        u = x / delta
        # sin(a) - sin(b) = 2 cos((a + b) / 2) sin((a - b) / 2)
        s = 2.0 * math.cos(TWO_PI * (u + 0.5 * du)) * math.sin(math.pi * du)
        return delta * (du + kappa / TWO_PI * s)
    if b == 1:
        return t * (1.0 - delta) / (0.5 - delta)
    return 2.0 * t


@njit(cache=True)
def _delta(kind, p, bps, x, t):
    """Lift difference F(x + t) - F(x), crossing branch boundaries if needed."""
    nb = bps.shape[0] - 1
    cur = x
    rem = t
    total = 0.0
    b = _branch_of(bps, cur)
    for _ in range(16):
        if rem == 0.0:
            break
        if rem > 0.0:
            hi = bps[b + 1]
            if cur + rem <= hi:
                total += _diff(kind, p, b, cur, rem)
                rem = 0.0
            else:
                step = hi - cur
                total += _diff(kind, p, b, cur, step)
                rem -= step
                b += 1
                cur = hi
                if b == nb:
                    b = 0
                    cur = 0.0
        else:
            lo = bps[b]
            if cur + rem >= lo:
                total += _diff(kind, p, b, cur, rem)
                rem = 0.0
            else:
                step = lo - cur
                total += _diff(kind, p, b, cur, step)
                rem -= step
                b -= 1
                if b < 0:
                    b = nb - 1
                    cur = 1.0
                else:
                    cur = lo
    return total


@njit(cache=True)
def _deriv_at(kind, p, bps, y):
    y = y - math.floor(y)
    return _dlift(kind, p, _branch_of(bps, y), y)


@njit(cache=True)
def _side_deriv(kind, p, bps, x, left):
    b = _branch_of(bps, x)
    if left and x == bps[b]:
        nb = bps.shape[0] - 1
        if b == 0:
            return _dlift(kind, p, nb - 1, 1.0)
        return _dlift(kind, p, b - 1, x)
    return _dlift(kind, p, b, x)


@njit(cache=True)
def _solve_offset(kind, p, bps, minslope, maxslope, x, d):
    """t with F(x + t) - F(x) = d (same sign as d); returns (t, relative residual)."""
    lo = d / maxslope
    hi = d / minslope
    if d < 0:
        lo, hi = hi, lo
    t = d / _side_deriv(kind, p, bps, x, d < 0)
    if t < lo or t > hi:
        t = 0.5 * (lo + hi)
    g = 0.0
    for _ in range(200):
        g = _delta(kind, p, bps, x, t) - d
        if abs(g) <= 2e-16 * abs(d):
            break
        # keep a bracket: delta is increasing in t
        if g > 0:
            hi = t
        else:
            lo = t
        slope = _deriv_at(kind, p, bps, x + t)
        tn = t - g / slope
        if tn <= lo or tn >= hi:
            tn = 0.5 * (lo + hi)
        if tn == t:
            break
        t = tn
    return t, abs(g) / abs(d)


@njit(cache=True)
def _forward(kind, p, bps, x):
    b = _branch_of(bps, x)
    if kind == DOUBLING or kind == INTERMITTENT:
        y = 2.0 * x - 1.0 if b == 1 else _lift(kind, p, b, x)
    else:
        y = 2.0 * x - 1.0 if b == 2 else _lift(kind, p, b, x)
    if y >= 1.0:
        y -= 1.0
    if y < 0.0:
        y += 1.0
    return b, y


@njit(cache=True)
def _iterate(kind, p, bps, seed, n):
    points = np.empty(n)
    logs = np.empty(n)
    branches = np.empty(n, np.int8)
    hits = np.zeros(n, np.bool_)
    x = seed
    for j in range(n):
        points[j] = x
        for q in range(1, bps.shape[0] - 1):
            if x == bps[q]:
                hits[j] = True
        b, y = _forward(kind, p, bps, x)
        branches[j] = b
        logs[j] = -math.log(_dlift(kind, p, b, x))
        x = y
    return points, logs, branches, hits, x


@njit(cache=True)
def _pullback(kind, p, bps, minslope, maxslope, points, n, log_l, log_r, clip, switch):
    """Log offsets (left, right) of the pulled-back interval at each time 0..n."""
    out_l = np.empty(n + 1)
    out_r = np.empty(n + 1)
    out_l[n] = log_l
    out_r[n] = log_r
    maxres = 0.0
    crossings = 0
    for j in range(n - 1, -1, -1):
        x = points[j]
        L = out_l[j + 1]
        if L > switch:
            t, res = _solve_offset(kind, p, bps, minslope, maxslope, x, -math.exp(L))
            maxres = max(maxres, res)
            nl = math.log(-t)
        else:
            nl = L - math.log(_side_deriv(kind, p, bps, x, True))
        R = out_r[j + 1]
        if R > switch:
            t, res = _solve_offset(kind, p, bps, minslope, maxslope, x, math.exp(R))
            maxres = max(maxres, res)
            nr = math.log(t)
        else:
            nr = R - math.log(_side_deriv(kind, p, bps, x, False))
        out_l[j] = min(nl, clip)
        out_r[j] = min(nr, clip)
        b = _branch_of(bps, x)
        if x - math.exp(out_l[j]) < bps[b] or x + math.exp(out_r[j]) > bps[b + 1]:
            crossings += 1
    return out_l, out_r, maxres, crossings


@njit(cache=True)
def _pliss_scan(bint):
    n = bint.shape[0]
    out = np.zeros(n + 1, np.bool_)
    B = 0
    running_min = 0
    for m in range(1, n + 1):
        B += bint[m - 1]
        if B <= running_min:
            out[m] = True
        running_min = min(running_min, B)
    return out


@njit(cache=True)
def _direct_check(bint):
    n = bint.shape[0]
    out = np.zeros(n + 1, np.bool_)
    for m in range(1, n + 1):
        s = 0
        ok = True
        for k in range(1, m + 1):
            s += bint[m - k]
            if s > 0:
                ok = False
                break
        out[m] = ok
    return out


# --- public types -------------------------------------------------------------

@dataclass(frozen=True)
class MarkovModel:
    """Markov-partition model of a map: SFT plus good/bad sub-SFTs."""
    labels: tuple
    system: SftSystem
    good: SftSystem
    bad: SftSystem


@dataclass(frozen=True, eq=False)
class PiecewiseMap:
    kind: str
    params: tuple
    breakpoints: np.ndarray
    delta0: float
    markov_model: MarkovModel | None = None
    trap: tuple | None = None

    @property
    def _code(self):
        return {"doubling": DOUBLING, "intermittent": INTERMITTENT, "deformed": DEFORMED}[self.kind]

    @property
    def _p(self):
        return np.array(self.params if self.params else (0.0,), dtype=float)

    @property
    def n_branches(self) -> int:
        return len(self.breakpoints) - 1

    @property
    def branch_domains(self) -> list:
        b = self.breakpoints
        return [(float(b[i]), float(b[i + 1])) for i in range(self.n_branches)]

    @property
    def slope_bounds(self) -> tuple:
        if self.kind == "doubling":
            return 2.0, 2.0
        if self.kind == "intermittent":
            return 1.0, 1.0 + (1 + self.params[0]) * 2 ** self.params[0] * 0.5 ** self.params[0]
        delta, kappa = self.params
        return 1.0 - kappa, max(1.0 + kappa, (1 - delta) / (0.5 - delta), 2.0)

    def branch(self, x: float) -> int:
        return int(_branch_of(self.breakpoints, float(x)))

    def __call__(self, x: float) -> float:
        return float(_forward(self._code, self._p, self.breakpoints, float(x))[1])

    def derivative(self, x: float) -> float:
        return float(_dlift(self._code, self._p, self.branch(x), float(x)))

    def inverse(self, branch: int, y: float) -> float:
        """Preimage of ``y`` in branch ``branch`` (the branch is a homeomorphism onto its image)."""
        lo, _ = self.branch_domains[branch]
        image_lo = float(_forward(self._code, self._p, self.breakpoints, lo)[1])
        d = (y - image_lo) % 1.0
        lo_hi = self.branch_domains[branch]
        width = self.lift_difference(lo_hi[0], lo_hi[1] - lo_hi[0])
        if d >= width:
            raise InvalidParameter(f"{y} is not in the image of branch {branch}")
        if d == 0:
            return lo
        mins, maxs = self.slope_bounds
        t, _ = _solve_offset(self._code, self._p, self.breakpoints, mins, maxs, lo, d)
        return lo + t

    def lift_difference(self, x: float, t: float) -> float:
        return float(_delta(self._code, self._p, self.breakpoints, float(x), float(t)))


def make_map(kind: str, **params) -> PiecewiseMap:
    """Build and validate a map; deformed maps carry their Markov model."""
    if kind == "doubling":
        return PiecewiseMap("doubling", (), np.array([0.0, 0.5, 1.0]), params.get("delta0", 0.25))
    if kind == "intermittent":
        alpha = float(params.get("alpha", 0.5))
        if not 0 < alpha < 1:
            raise InvalidParameter(f"intermittent alpha must lie in (0, 1), got {alpha}")
        return PiecewiseMap("intermittent", (alpha,), np.array([0.0, 0.5, 1.0]),
                            params.get("delta0", 0.25))
    if kind == "deformed":
        delta = float(params.get("delta", 0.1))
        kappa = float(params.get("kappa", 0.5))
        if not 0 < delta < 0.5:
            raise InvalidParameter(f"trap radius delta must lie in (0, 1/2), got {delta}")
        if not 0 < kappa < 1:
            raise InvalidParameter(f"kappa must lie in (0, 1), got {kappa}")
        full = SftSystem(np.array([[1, 0, 0], [0, 1, 1], [1, 1, 1]]), name="deformed-markov")
        good = full.restrict([[0, 0, 0], [0, 1, 1], [0, 1, 1]], name="good")
        bad = full.restrict([[1, 0, 0], [0, 0, 0], [0, 0, 0]], name="trap")
        model = MarkovModel(("T", "A", "B"), full, good, bad)
        return PiecewiseMap("deformed", (delta, kappa), np.array([0.0, delta, 0.5, 1.0]),
                            params.get("delta0", min(delta, 0.25)), model, (0.0, delta))
    raise InvalidParameter(f"unknown map kind {kind!r}")


@dataclass(frozen=True, eq=False)
class OrbitTrace:
    seed: float
    points: np.ndarray
    log_inv_deriv: np.ndarray
    branches: np.ndarray
    endpoint: float
    endpoint_hits: np.ndarray = field(repr=False)

    @property
    def length(self) -> int:
        return len(self.points)


def iterate_orbit(fmap: PiecewiseMap, seed: float, n: int, strict: bool = False) -> OrbitTrace:
    """Forward orbit ``x_0 .. x_{n-1}`` with ``-log Df`` and branch indices.

    Landing exactly on an interior breakpoint is resolved left-closed and
    recorded in ``endpoint_hits``; ``strict`` turns it into an error.
    """
    if not 0 <= seed < 1:
        raise InvalidParameter("seed must lie in [0, 1)")
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    pts, logs, br, hits, end = _iterate(fmap._code, fmap._p, fmap.breakpoints, float(seed), int(n))
    hit_idx = np.flatnonzero(hits)
    if strict and hit_idx.size:
        raise EndpointAmbiguity(f"orbit hits a breakpoint at steps {hit_idx[:5].tolist()}")
    return OrbitTrace(float(seed), pts, logs, br, float(end), hit_idx)


def default_c(fmap: PiecewiseMap, burn_in: int = 100_000, seed: float = 0.1234567) -> float:
    """Expansion constant: log 2 on uniformly expanding pieces, else half the orbit average."""
    if fmap.kind in ("doubling", "deformed"):
        return math.log(2.0)
    trace = iterate_orbit(fmap, seed, burn_in)
    return 0.5 * float(-trace.log_inv_deriv.mean())


# --- Gibbs time series ----------------------------------------------------------

@dataclass(frozen=True)
class GibbsTimeSeries:
    times: np.ndarray
    c: float
    length: int
    frequency: float
    max_gap_ratio: float

    def bracket(self, n: int) -> tuple:
        """Consecutive recorded times ``n_i <= n <= n_{i+1}`` (time 0 counts as a Gibbs time)."""
        times = np.concatenate([[0], self.times])
        i = int(np.searchsorted(times, n, side="right")) - 1
        if i < 0 or i + 1 >= len(times):
            if i >= 0 and times[i] == n:
                return int(n), int(n)
            raise InsufficientData(f"time {n} is not bracketed by recorded Gibbs times")
        if times[i] == n:
            return int(n), int(n)
        return int(times[i]), int(times[i + 1])


def _series(times, c, length) -> GibbsTimeSeries:
    times = np.asarray(times, dtype=np.int64)
    freq = len(times) / length if length else 0.0
    if len(times) > 1:
        ratio = float(np.max(np.diff(times) / times[:-1]))
    else:
        ratio = 0.0
    return GibbsTimeSeries(times, float(c), int(length), float(freq), ratio)


def _quantize(log_inv_deriv, c):
    b = np.asarray(log_inv_deriv, dtype=float) + c / 2
    top = max(float(np.max(np.abs(b))), 1e-300)
    # exact integer arithmetic: both detectors see the same rounded increments
    bits = int(math.floor(math.log2(2.0 ** 62 / (len(b) * top + 1.0))))
    bits = max(min(bits, 52), 20)
    return np.round(b * 2.0 ** bits).astype(np.int64)


def hyperbolic_times(trace: OrbitTrace | np.ndarray, c: float) -> GibbsTimeSeries:
    """Times ``n`` with ``sum_{j=n-k}^{n-1} log|Df(x_j)^-1| <= -c k / 2`` for all ``1 <= k <= n``.

    Linear scan: with ``B_n = sum_{j<n} (a_j + c/2)``, ``n`` qualifies iff
    ``B_n <= min_{i<n} B_i``.
    """
    if c <= 0:
        raise InvalidParameter("c must be positive")
    logs = trace.log_inv_deriv if isinstance(trace, OrbitTrace) else np.asarray(trace, float)
    if len(logs) == 0:
        raise InsufficientData("empty trace")
    flags = _pliss_scan(_quantize(logs, c))
    return _series(np.flatnonzero(flags), c, len(logs))


def hyperbolic_times_direct(trace, c: float) -> np.ndarray:
    """Quadratic-time reference check of the hyperbolic-time criterion."""
    logs = trace.log_inv_deriv if isinstance(trace, OrbitTrace) else np.asarray(trace, float)
    return np.flatnonzero(_direct_check(_quantize(logs, c)))


# --- pullbacks ------------------------------------------------------------------

def pullback_offsets(fmap: PiecewiseMap, trace: OrbitTrace, n: int, radius: float,
                     clip: float | None = None):
    """Log offsets of the component of ``f^-n(B(f^n x, radius))`` around each ``x_j``.

    Returns ``(log_left, log_right, max_residual, crossings)`` with arrays indexed
    by ``j = 0..n``; ``clip`` intersects each step with a ball of that radius.
    """
    if not 1 <= n <= trace.length:
        raise InsufficientData(f"time {n} outside the trace (length {trace.length})")
    mins, maxs = fmap.slope_bounds
    lr = math.log(radius)
    cl = math.inf if clip is None else math.log(clip)
    points = np.append(trace.points, trace.endpoint)
    return _pullback(fmap._code, fmap._p, fmap.breakpoints, mins, maxs, points, int(n),
                     lr, lr, cl, LOG_SWITCH)


@dataclass(frozen=True)
class StarReport:
    time: int
    epsilon: float
    c: float
    is_hyperbolic: bool
    surjectivity_residual: float
    max_log_ratio: float
    violations: int
    first_violation: int | None
    branch_crossings: int

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.surjectivity_residual <= 1e-12


def verify_star(fmap: PiecewiseMap, trace: OrbitTrace, n: int, epsilon: float, c: float,
                strict: bool = True, slack: float = 1e-12) -> StarReport:
    """Pull the epsilon-ball at time ``n`` back along the orbit and test contraction.

    Checks ``|I_{n-j}| <= (1 + slack) e^{-cj/4} |I_n|`` for the three endpoint
    pairs (left-right, left-center, center-right) and every ``1 <= j <= n``.
    """
    if epsilon > fmap.delta0:
        raise InvalidParameter(f"epsilon {epsilon} exceeds delta0 = {fmap.delta0}")
    ll, rr, res, crossings = pullback_offsets(fmap, trace, n, epsilon)
    j = np.arange(n, -1, -1, dtype=float)  # index i holds time i = n - j
    base = math.log(2 * epsilon)
    whole = np.logaddexp(ll, rr) - base
    left = ll - math.log(epsilon)
    right = rr - math.log(epsilon)
    worst = np.maximum(np.maximum(whole, left), right) + c * j / 4
    worst = worst[:-1]
    bad = np.flatnonzero(worst > math.log1p(slack))
    hyp = bool(n in set(hyperbolic_times(trace.log_inv_deriv[:n], c).times.tolist()))
    report = StarReport(int(n), float(epsilon), float(c), hyp, float(res), float(worst.max()),
                        int(bad.size), int(n - bad.max()) if bad.size else None, int(crossings))
    if strict and not report.passed:
        reason = (f"backward contraction fails at j={report.first_violation}" if bad.size
                  else f"surjectivity residual {res:.2e}")
        raise StarViolation(n, reason, report)
    return report


# --- zooming times ----------------------------------------------------------------

@dataclass(frozen=True)
class Zoom:
    """Contraction sequence ``alpha_n(r)``, vectorized over ``n``."""
    name: str
    fn: Callable

    def __call__(self, n, r):
        return self.fn(np.asarray(n, dtype=float), r)

    @classmethod
    def exponential(cls, rate: float) -> "Zoom":
        return cls(f"exp(-{rate} n) r", lambda n, r: np.exp(-rate * n) * r)

    @classmethod
    def shift_metric(cls) -> "Zoom":
        return cls("(1+n sqrt r)^-2 r", lambda n, r: r / (1.0 + n * np.sqrt(r)) ** 2)


def validate_zoom(zoom: Zoom, delta: float, n_max: int = 40, grid: int = 25,
                  rtol: float = 1e-12) -> None:
    """Check monotonicity, ``alpha_n(r) < r``, ``alpha_n o alpha_m <= alpha_{n+m}`` and summability."""
    rs = np.geomspace(delta * 1e-6, delta, grid)
    ns = np.arange(1, n_max + 1)
    table = np.array([zoom(ns, r) for r in rs])  # (r, n)
    if np.any(np.diff(table, axis=0) < -rtol * table[1:]):
        raise InvalidParameter(f"zoom {zoom.name}: not monotone in r")
    if np.any(table >= rs[:, None]):
        raise InvalidParameter(f"zoom {zoom.name}: alpha_n(r) must stay below r")
    for m in (1, 2, 5, 10):
        for i, r in enumerate(rs):
            inner = float(zoom(m, r))
            comp = zoom(ns, inner)
            direct = zoom(ns + m, r)
            if np.any(comp > direct * (1 + rtol) + 1e-300):
                raise InvalidParameter(f"zoom {zoom.name}: composition exceeds alpha_(n+m)")
    long_n = np.arange(1, 200_001)
    for r in rs[[0, -1]]:
        terms = zoom(long_n, r)
        head, total = terms[:100_000].sum(), terms.sum()
        if not np.isfinite(total) or total - head > 1e-2 * max(total, 1e-300):
            raise InvalidParameter(f"zoom {zoom.name}: partial sums do not settle")


def zooming_times(fmap: PiecewiseMap, trace: OrbitTrace, zoom: Zoom, delta: float,
                  n_max: int | None = None, slack: float = 1e-12) -> GibbsTimeSeries:
    """Times n at which every pulled-back endpoint distance obeys the zoom bound."""
    if delta > fmap.delta0:
        raise InvalidParameter(f"delta {delta} exceeds delta0 = {fmap.delta0}")
    validate_zoom(zoom, delta)
    n_max = trace.length if n_max is None else min(n_max, trace.length)
    times = []
    for n in range(1, n_max + 1):
        if _is_zooming(fmap, trace, n, zoom, delta, slack):
            times.append(n)
    return _series(times, float("nan"), n_max)


def _is_zooming(fmap, trace, n, zoom, delta, slack):
    ll, rr, _, _ = pullback_offsets(fmap, trace, n, delta)
    steps = np.arange(n, 0, -1)  # for time j = 0..n-1 the gap n - j
    for log_now, r_n in ((np.logaddexp(ll, rr)[:-1], 2 * delta), (ll[:-1], delta), (rr[:-1], delta)):
        bound = np.log(zoom(steps, r_n)) + math.log1p(slack)
        if np.any(log_now > bound):
            return False
    return True


def symbolic_zooming_check(n_max: int, delta: float, zoom: Zoom, depth: int = 60,
                           rtol: float = 1e-12) -> list:
    """Times ``n <= n_max`` that are zooming for the shift with metric ``n(x,y)^-2``.

    Inside ``B_delta(x, n)`` two points first disagree at some index ``N + n``
    with ``N > m(delta)``; after ``j`` steps their distance is ``(N + n - j)^-2``.
    """
    from .symbolic import prefix_length_for_radius
    m = prefix_length_for_radius(delta)
    times = []
    for n in range(1, n_max + 1):
        ok = True
        for N in range(m + 1, m + 1 + depth):
            r = N ** -2.0
            j = np.arange(n)
            actual = (N + n - j) ** -2.0
            if np.any(actual > zoom(n - j, r) * (1 + rtol)):
                ok = False
                break
        if ok:
            times.append(n)
    return times
