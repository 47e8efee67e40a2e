"""Large deviations on SFTs: pressure curves, Legendre rates, exact deviation
probabilities, fitted decay rates, Gibbs-time gap tails, gluing and Katok entropy.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import lgamma
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from .errors import InsufficientData, InvalidParameter, InvalidSystem, ResourceLimit
from .maps import GibbsTimeSeries
from .measures import CylinderMeasure
from .symbolic import (Potential, SftSystem, as_word, enumerate_words, prefix_length_for_radius,
                       word_array)
from .transfer import pressure

GOLDEN = (math.sqrt(5) - 1) / 2
BETA_GRID = (0.05, 0.1, 0.2)


# --- pressure curve and rate function ---------------------------------------------

@dataclass
class RateCurve:
    system: SftSystem
    phi: Potential
    psi: Potential
    t_grid: np.ndarray
    q: np.ndarray
    convex: bool
    c_grid: np.ndarray = field(default_factory=lambda: np.array([]))
    I: np.ndarray = field(default_factory=lambda: np.array([]))
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def P0(self) -> float:
        return self.q_at(0.0)

    def q_at(self, t: float) -> float:
        t = float(t)
        if t not in self._cache:
            self._cache[t] = pressure(self.system, self.phi + self.psi * t)
        return self._cache[t]

    def derivative(self, t: float, h: float = 1e-5) -> float:
        return (self.q_at(t + h) - self.q_at(t - h)) / (2 * h)


def pressure_curve(system: SftSystem, phi: Potential, psi: Potential, t_grid) -> RateCurve:
    """``q(t) = P(phi + t psi)`` on ``t_grid`` with a discrete convexity check."""
    if not (phi.is_locally_constant and psi.is_locally_constant):
        raise InvalidParameter("pressure curves need locally constant phi and psi")
    t_grid = np.asarray(sorted(float(t) for t in t_grid))
    curve = RateCurve(system, phi, psi, t_grid, np.array([]), True)
    q = np.array([curve.q_at(t) for t in t_grid])
    curve.q = q
    if len(t_grid) >= 3:
        h1 = np.diff(t_grid)
        slopes = np.diff(q) / h1
        curve.convex = bool(np.all(np.diff(slopes) >= -1e-9))
    return curve


def _max_mean_cycle(system: SftSystem, psi: Potential, minimize: bool = False) -> float:
    """Extreme cycle mean of ``psi`` on the state graph (Karp's algorithm)."""
    from .transfer import transfer_matrix
    tm = transfer_matrix(system, psi)
    W = tm.weights
    n = W.shape[0]
    # log of exp(psi) recovers psi on each edge
    with np.errstate(divide="ignore"):
        w = np.where(W > 0, np.log(np.where(W > 0, W, 1.0)), -np.inf)
    if minimize:
        w = np.where(np.isfinite(w), -w, -np.inf)
    D = np.full((n + 1, n), -np.inf)
    D[0, :] = 0.0
    for k in range(1, n + 1):
        D[k] = np.max(D[k - 1][:, None] + w, axis=0)
    best = -np.inf
    for v in range(n):
        if not np.isfinite(D[n, v]):
            continue
        worst = np.inf
        for k in range(n):
            if np.isfinite(D[k, v]):
                worst = min(worst, (D[n, v] - D[k, v]) / (n - k))
        best = max(best, worst)
    return -best if minimize else best


@dataclass(frozen=True)
class RateValue:
    value: float
    t_star: float
    boundary: bool = False
    flag: str = ""


def rate_function(curve: RateCurve, c: float, t_max: float = 200.0) -> RateValue:
    """``I(c) = inf_{t >= 0} [q(t) - t c] - q(0)`` (non-positive).

    Returns ``-inf`` with a flag when ``c`` exceeds the largest achievable
    ergodic average of ``psi``; at that boundary the limit ``t -> t_max`` is used.
    """
    q0 = curve.q_at(0.0)
    mean = curve.derivative(0.0)
    if c <= mean:
        return RateValue(0.0, 0.0)
    s_inf = _max_mean_cycle(curve.system, curve.psi)
    if c > s_inf + 1e-12:
        return RateValue(-math.inf, math.inf, True, "c above the maximal ergodic average")
    if abs(c - s_inf) <= 1e-12:
        return RateValue(curve.q_at(t_max) - t_max * c - q0, t_max, True, "boundary limit")

    def g(t):
        return curve.q_at(t) - t * c

    grid = np.concatenate([[0.0], np.geomspace(1e-3, t_max, 60)])
    vals = [g(t) for t in grid]
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = g(x1), g(x2)
    while b - a > 1e-10:
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = g(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = g(x2)
    t_star = 0.5 * (a + b)
    return RateValue(min(g(t_star), vals[i]) - q0, t_star)


def rate_curve(curve: RateCurve, c_grid) -> RateCurve:
    curve.c_grid = np.asarray(c_grid, dtype=float)
    curve.I = np.array([rate_function(curve, c).value for c in curve.c_grid])
    return curve


def bernoulli_rate_oracle(p: Sequence[float], psi_values: Sequence[float], c: float) -> float:
    """Measure-side rate on a 2-symbol full shift with ``phi(a) = log p_a``.

    Maximizes ``h(eta) + int phi d eta - P`` over Bernoulli ``eta = (1 - r, r)``
    with ``int psi d eta >= c``; ``P = log(p_0 + p_1)``.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(psi_values, dtype=float)
    if len(p) != 2:
        raise InvalidParameter("the oracle handles two symbols")
    P = math.log(p.sum())
    # int psi = v0 + r (v1 - v0) >= c
    if v[1] == v[0]:
        feasible = (0.0, 1.0) if v[0] >= c else None
    elif v[1] > v[0]:
        feasible = (max(0.0, (c - v[0]) / (v[1] - v[0])), 1.0)
    else:
        feasible = (0.0, min(1.0, (c - v[0]) / (v[1] - v[0])))
    if feasible is None or feasible[0] > feasible[1]:
        return -math.inf

    def neg(r):
        ent = -sum(x * math.log(x) for x in (r, 1 - r) if x > 0)
        return -(ent + (1 - r) * math.log(p[0]) + r * math.log(p[1]) - P)

    lo, hi = feasible
    if hi - lo < 1e-15:
        return -neg(lo)
    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    return -min(res.fun, neg(lo), neg(hi))


# --- exact deviation probabilities -----------------------------------------------------

def _rationalize(x: float, max_den: int = 10_000) -> Fraction:
    f = Fraction(x).limit_denominator(max_den)
    if abs(float(f) - x) > 1e-12:
        raise InvalidParameter(f"{x} is not a rational with denominator <= {max_den}; "
                               "exact mode rejects irrational observables")
    return f


@dataclass(frozen=True)
class _Chain:
    states: list
    r: int
    init: list          # (state index, weight)
    moves: list         # (u, v, conditional, psi increment or None)
    k: int
    q: int


def _build_chain(system, mu: CylinderMeasure, psi: Potential, exact: bool):
    if mu.kind == "tabulated":
        raise InvalidParameter("deviation DP needs a state-chain measure")
    k = psi.depth
    r = max(mu.state_length, k - 1, 1)
    vals = [_rationalize(v) for v in psi.values]
    q = math.lcm(*[f.denominator for f in vals])
    ints = {w: int(f * q) for w, f in zip(psi.words, vals)}
    states = list(enumerate_words(system, r))
    index = {u: i for i, u in enumerate(states)}
    conv = Fraction if exact else float
    init = []
    for i, u in enumerate(states):
        wt = mu.weight(u)
        if wt > 0:
            init.append((i, conv(wt)))
    s = mu.state_length
    moves = []
    for i, u in enumerate(states):
        su = mu.index.get(u[-s:])
        for b in system.successors(u[-1]):
            v = u[1:] + (b,)
            j = index.get(v)
            sv = mu.index.get((u + (b,))[-s:])
            if j is None or su is None or sv is None:
                continue
            cond = conv(mu.T[su, sv]) * conv(mu.end[sv]) / conv(mu.end[su])
            if cond == 0:
                continue
            window = (u + (b,))[-k:]
            moves.append((i, j, cond, ints[window]))
    return _Chain(states, r, init, moves, k, q), ints


def _initial_sums(chain, ints, n):
    """psi-sum of the windows fully inside each initial r-word (capped at n terms)."""
    k = chain.k
    out = {}
    for i, u in enumerate(chain.states):
        count = min(len(u) - k + 1, n)
        out[i] = sum(ints[u[j: j + k]] for j in range(max(count, 0)))
    return out


def _threshold(c, n, q, inclusive):
    cf = _rationalize(c, 10 ** 9) if not isinstance(c, Fraction) else c
    target = cf * n * q
    if inclusive:
        return math.ceil(target)
    return math.floor(target) + 1


def deviation_prob_exact(system: SftSystem, mu: CylinderMeasure, psi: Potential, c: float,
                         n: int, inclusive: bool = True, exact: bool = False,
                         max_cells: int = 50_000_000):
    """``mu{x : (1/n) S_n psi(x) >= c}`` (or ``> c`` when ``inclusive=False``).

    Dynamic programming over (r-word state, integer partial sum) after scaling
    ``psi`` by the common denominator of its values. ``exact=True`` runs in
    rational arithmetic and returns a :class:`Fraction`; otherwise the table is
    kept in log space and a float is returned.
    """
    if exact:
        return _dp_exact(system, mu, psi, c, n, inclusive, max_cells)
    return math.exp(log_deviation_prob(system, mu, psi, c, n, inclusive, max_cells))


def _dp_exact(system, mu, psi, c, n, inclusive, max_cells):
    chain, ints = _build_chain(system, mu, psi, exact=True)
    thr = _threshold(c, n, chain.q, inclusive)
    start = _initial_sums(chain, ints, n)
    table = [dict() for _ in chain.states]
    for i, wt in chain.init:
        table[i][start[i]] = table[i].get(start[i], 0) + wt
    produced = len(chain.states[0]) - chain.k + 1
    total_symbols = n + chain.k - 1
    for length in range(chain.r, max(total_symbols, chain.r)):
        new = [dict() for _ in chain.states]
        count_window = produced < n
        for i, j, cond, inc in chain.moves:
            add = inc if count_window else 0
            dst = new[j]
            for s, wt in table[i].items():
                key = s + add
                dst[key] = dst.get(key, 0) + wt * cond
        table = new
        produced += 1
        if sum(len(t) for t in table) > max_cells:
            raise ResourceLimit("deviation table overflow")
    return sum((wt for t in table for s, wt in t.items() if s >= thr), Fraction(0))


def log_deviation_prob(system: SftSystem, mu: CylinderMeasure, psi: Potential, c: float,
                       n: int, inclusive: bool = True, max_cells: int = 50_000_000) -> float:
    """Natural log of the deviation probability, computed with a log-space table."""
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    chain, ints = _build_chain(system, mu, psi, exact=False)
    thr = _threshold(c, n, chain.q, inclusive)
    lo_inc = min(0, min(m[3] for m in chain.moves))
    hi_inc = max(0, max(m[3] for m in chain.moves))
    start = _initial_sums(chain, ints, n)
    total_symbols = n + chain.k - 1
    steps = max(total_symbols - chain.r, 0)
    base_lo = min(start.values()) + lo_inc * steps
    base_hi = max(start.values()) + hi_inc * steps
    width = base_hi - base_lo + 1
    if width * len(chain.states) > max_cells:
        if n <= 24:
            return math.log(float(brute_force_deviation(system, mu, psi, c, n, inclusive)))
        raise ResourceLimit(f"deviation table of {width * len(chain.states)} cells")
    L = np.full((len(chain.states), width), -np.inf)
    for i, wt in chain.init:
        L[i, start[i] - base_lo] = np.logaddexp(L[i, start[i] - base_lo], math.log(wt))
    produced = len(chain.states[0]) - chain.k + 1
    with np.errstate(divide="ignore"):
        moves = [(i, j, math.log(cond), inc) for i, j, cond, inc in chain.moves]
    for _ in range(steps):
        new = np.full_like(L, -np.inf)
        count_window = produced < n
        for i, j, lc, inc in moves:
            add = inc if count_window else 0
            src = L[i] + lc
            if add >= 0:
                new[j, add:] = np.logaddexp(new[j, add:], src[: width - add])
            else:
                new[j, :add] = np.logaddexp(new[j, :add], src[-add:])
        L = new
        produced += 1
    col = thr - base_lo
    if col >= width:
        return -math.inf
    tail = L[:, max(col, 0):]
    return float(logsumexp(tail)) if np.isfinite(tail).any() else -math.inf


def brute_force_deviation(system: SftSystem, mu: CylinderMeasure, psi: Potential, c: float,
                          n: int, inclusive: bool = True) -> Fraction:
    """Enumerate every word of length ``n + depth - 1``; exact rational result."""
    k = psi.depth
    N = n + k - 1
    if N > 24:
        raise ResourceLimit("brute force limited to 24 symbols")
    vals = [_rationalize(v) for v in psi.values]
    q = math.lcm(*[f.denominator for f in vals])
    thr = _threshold(c, n, q, inclusive)
    a = system.alphabet_size
    table = np.zeros(a ** k, dtype=np.int64)
    for w, f in zip(psi.words, vals):
        code = 0
        for s in w:
            code = code * a + s
        table[code] = int(f * q)
    words = word_array(system, N).astype(np.int64)
    codes = np.zeros((words.shape[0], n), dtype=np.int64)
    for j in range(k):
        codes = codes * a + words[:, j: j + n]
    sums = table[codes].sum(axis=1)
    hits = words[sums >= thr]
    return _exact_mass(mu, hits)


def _exact_mass(mu: CylinderMeasure, words: np.ndarray) -> Fraction:
    """Exact total mass of the given words: integer numerators over a common power of two."""
    if len(words) == 0:
        return Fraction(0)
    idx = mu.state_indices(words)
    fr_T = [[Fraction(float(x)) for x in row] for row in mu.T]
    fr_start = [Fraction(float(x)) for x in mu.start]
    fr_end = [Fraction(float(x)) for x in mu.end]
    den = 1
    for f in [f for row in fr_T for f in row] + fr_start + fr_end:
        den = math.lcm(den, f.denominator)
    num_T = np.array([[int(f * den) for f in row] for row in fr_T], dtype=object)
    num = np.array([int(f * den) for f in fr_start], dtype=object)[idx[:, 0]]
    for j in range(idx.shape[1] - 1):
        num = num * num_T[idx[:, j], idx[:, j + 1]]
    num = num * np.array([int(f * den) for f in fr_end], dtype=object)[idx[:, -1]]
    total = sum(num.tolist())
    return Fraction(total, den ** (idx.shape[1] + 1))


# --- empirical rates ---------------------------------------------------------------

@dataclass(frozen=True)
class EmpiricalRate:
    slope: float
    intercept: float
    residual: float
    power_exponent: float
    power_residual: float
    subexponential: bool


def empirical_rate(ns, probabilities=None, log_probabilities=None) -> EmpiricalRate:
    """Least-squares slope of ``log mu(B_n)`` against ``n``, with a power-law comparison.

    Decay is flagged subexponential when a fit ``a + b log n`` explains the data
    at least as well as the linear fit, or when the slope is negligible.
    """
    ns = np.asarray(ns, dtype=float)
    if log_probabilities is None:
        log_probabilities = np.log(np.asarray(probabilities, dtype=float))
    y = np.asarray(log_probabilities, dtype=float)
    if len(ns) < 5:
        raise InsufficientData("need at least 5 sample sizes")
    if not np.all(np.isfinite(y)):
        raise InsufficientData("probabilities must be positive")
    A = np.vstack([ns, np.ones_like(ns)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    B = np.vstack([np.log(ns), np.ones_like(ns)]).T
    pcoef, *_ = np.linalg.lstsq(B, y, rcond=None)
    pres = float(np.sqrt(np.mean((B @ pcoef - y) ** 2)))
    spread = float(np.ptp(y)) or 1.0
    sub = abs(coef[0]) * np.ptp(ns) < 0.5 or pres <= res
    return EmpiricalRate(float(coef[0]), float(coef[1]), res / spread, float(pcoef[0]), pres / spread,
                         bool(sub))


# --- gap tails --------------------------------------------------------------------

@dataclass(frozen=True)
class GapTail:
    beta: float
    alpha: float
    n_grid: np.ndarray
    fractions: np.ndarray
    counts: np.ndarray
    n_traces: int
    rate: float
    rate_stderr: float


def _times_matrix(traces):
    arrays, lengths = [], []
    for t in traces:
        if isinstance(t, GibbsTimeSeries):
            arrays.append(np.asarray(t.times, dtype=np.int64))
            lengths.append(t.length)
        else:
            arr, length = t
            arrays.append(np.asarray(arr, dtype=np.int64))
            lengths.append(int(length))
    width = max(1, max(len(a) for a in arrays))
    big = np.iinfo(np.int64).max // 4
    mat = np.full((len(arrays), width), big, dtype=np.int64)
    for i, a in enumerate(arrays):
        mat[i, : len(a)] = np.sort(a)
    return mat, np.array(lengths, dtype=np.int64), big


def gap_tail(traces, alpha: float, beta: float, n_grid) -> GapTail:
    """Fraction of traces whose Gibbs-time gap around ``n`` exceeds ``beta n / (2 alpha)``.

    Time 0 counts as a Gibbs time. A gap running past the end of a trace is
    measured up to the trace length (so it is a lower bound). The rate is the
    ``n``-coefficient of a weighted fit ``log f = a + r n + b log n`` on the
    positive fractions; it is ``-inf`` when every fraction beyond the first
    few vanishes.
    """
    if alpha <= 0 or beta <= 0:
        raise InvalidParameter("alpha and beta must be positive")
    mat, lengths, big = _times_matrix(traces)
    n_grid = np.asarray(n_grid, dtype=np.int64)
    fractions, counts = [], []
    for n in n_grid:
        idx = (mat <= n).sum(axis=1)
        prev = np.where(idx > 0, mat[np.arange(len(mat)), np.maximum(idx - 1, 0)], 0)
        nxt_raw = np.where(idx < mat.shape[1], mat[np.arange(len(mat)), np.minimum(idx, mat.shape[1] - 1)], big)
        nxt = np.where(nxt_raw >= big, np.maximum(lengths, n) + 1, nxt_raw)
        gap = np.where(prev == n, 0, nxt - prev)
        hit = gap > beta * n / (2 * alpha)
        counts.append(int(hit.sum()))
        fractions.append(hit.mean())
    fractions = np.array(fractions)
    counts = np.array(counts)
    rate, err = _fit_rate(n_grid, fractions, counts)
    return GapTail(beta, alpha, n_grid, fractions, counts, len(mat), rate, err)


def _fit_rate(ns, fractions, counts):
    mask = counts > 0
    if mask.sum() < 3:
        return -math.inf, 0.0
    x = ns[mask].astype(float)
    y = np.log(fractions[mask])
    w = np.sqrt(counts[mask].astype(float))
    A = np.vstack([np.ones_like(x), x, np.log(x)]).T
    coef, *_ = np.linalg.lstsq(A * w[:, None], y * w, rcond=None)
    resid = (A @ coef - y) * w
    dof = max(len(x) - 3, 1)
    cov = np.linalg.pinv((A * w[:, None]).T @ (A * w[:, None])) * (resid @ resid / dof)
    return float(min(coef[1], 0.0)), float(math.sqrt(max(cov[1, 1], 0.0)))


def geometric_gap_traces(q: float, n_traces: int, length: int, seed: int = 0) -> list:
    """Synthetic Gibbs-time sequences with i.i.d. gaps, ``P(gap > g) = q**g``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_traces):
        gaps = rng.geometric(1 - q, size=length)
        times = np.cumsum(gaps)
        out.append((times[times <= length], length))
    return out


def geometric_gap_fraction(q: float, n: int, threshold_ratio: float = 1.0) -> float:
    """Exact renewal probability that the gap around ``n`` exceeds ``threshold_ratio * n``."""
    total = 0.0
    # last renewal at k < n (k = 0 always counts), renewal probability 1 - q for k >= 1
    for k in range(n):
        u = 1.0 if k == 0 else (1 - q)
        need = max(n - k, math.floor(threshold_ratio * n))  # gap must reach past n
        total += u * q ** need
    return total


# --- gluing ----------------------------------------------------------------------------

@dataclass(frozen=True)
class GlueResult:
    word: tuple
    connectors: list
    offsets: list
    bound: int


def _distances_to(system: SftSystem, target: int) -> np.ndarray:
    """Number of edges on a shortest path from each symbol into ``target`` (0 at target)."""
    k = system.alphabet_size
    dist = np.full(k, -1)
    dist[target] = 0
    dq = deque([target])
    while dq:
        b = dq.popleft()
        for a in range(k):
            if system.transitions[a, b] and dist[a] < 0:
                dist[a] = dist[b] + 1
                dq.append(a)
    return dist


def _path_length(system: SftSystem, dist: np.ndarray, a: int) -> int:
    """Edges on a shortest path of positive length from ``a`` to the target of ``dist``."""
    return 1 + min(int(dist[x]) for x in system.successors(a) if dist[x] >= 0)


def graph_diameter(system: SftSystem) -> int:
    """Largest shortest-path length (at least one edge) between two symbols."""
    out = 0
    for b in range(system.alphabet_size):
        dist = _distances_to(system, b)
        out = max(out, max(_path_length(system, dist, a) for a in range(system.alphabet_size)))
    return out


def glue_segments(system: SftSystem, segments) -> GlueResult:
    """Concatenate admissible segments using the shortest, lexicographically first connectors."""
    if not system.is_primitive:
        raise InvalidSystem("gluing needs a primitive system")
    segs = [as_word(s) for s in segments if len(s)]
    for s in segs:
        if not system.is_admissible(s):
            raise InvalidParameter(f"segment {s} is not admissible")
    bound = graph_diameter(system) - 1
    out: list = []
    connectors, offsets = [], []
    for s in segs:
        if out:
            dist = _distances_to(system, s[0])
            cur = out[-1]
            remaining = _path_length(system, dist, cur)
            path = []
            while remaining > 1:
                cur = next(x for x in system.successors(cur) if dist[x] == remaining - 1)
                path.append(cur)
                remaining -= 1
            connectors.append(len(path))
            out.extend(path)
        offsets.append(len(out))
        out.extend(s)
    return GlueResult(tuple(out), connectors, offsets, bound)


# --- Katok entropy --------------------------------------------------------------------

@dataclass(frozen=True)
class KatokEstimate:
    n: int
    epsilon: float
    rho: float
    log_count: float
    mode: str

    @property
    def value(self) -> float:
        return self.log_count / self.n


def _greedy_classes(log_w: np.ndarray, log_mult: np.ndarray, rho: float) -> float:
    """log N for classes of equal-weight cylinders taken in descending weight order."""
    order = np.argsort(-log_w, kind="stable")
    log_w, log_mult = log_w[order], log_mult[order]
    log_cum = np.logaddexp.accumulate(log_w + log_mult)
    log_need = math.log1p(-rho)
    i = int(np.searchsorted(log_cum, log_need - 1e-14))
    i = min(i, len(log_cum) - 1)
    before = math.exp(log_cum[i - 1]) if i > 0 else 0.0
    remaining = max((1 - rho) - before, 0.0)
    log_partial = math.log(remaining) - log_w[i] if remaining > 0 else 0.0
    if log_partial < 30:
        log_partial = math.log(max(math.ceil(math.exp(log_partial) * (1 - 1e-12)), 1))
    logs = np.append(log_mult[:i], log_partial)
    return float(logsumexp(logs))


def _log_binom(n, k):
    return lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1)


def katok_entropy(measure: CylinderMeasure, n: int, epsilon: float, rho: float,
                  max_words: int = 1 << 20) -> KatokEstimate:
    """``(1/n) log N`` with ``N`` the fewest ``(n + m(eps))``-cylinders of mass ``>= 1 - rho``."""
    if not 0 < rho < 1:
        raise InvalidParameter("rho must lie in (0, 1)")
    L = n + prefix_length_for_radius(epsilon)
    system = measure.system
    if system.count_words(L) <= max_words:
        words = word_array(system, L)
        lw = measure.log_weights(words)
        return KatokEstimate(n, epsilon, rho, _greedy_classes(lw, np.zeros_like(lw), rho), "cylinders")
    if measure.kind == "bernoulli":
        p = np.asarray(measure.info["p"], dtype=float)
        if len(p) != 2:
            raise ResourceLimit("weight classes implemented for two symbols")
        k = np.arange(L + 1)
        with np.errstate(divide="ignore"):
            lw = (L - k) * math.log(p[0]) + k * math.log(p[1]) if p.min() > 0 else None
        if lw is None:
            raise ResourceLimit("degenerate Bernoulli weights")
        lm = np.array([_log_binom(L, x) for x in k])
        return KatokEstimate(n, epsilon, rho, _greedy_classes(lw, lm, rho), "weight-classes")
    if measure.kind == "markov" and measure.state_length == 1 and len(measure.states) == 2:
        lw, lm = _markov_classes(measure, L)
        return KatokEstimate(n, epsilon, rho, _greedy_classes(lw, lm, rho), "weight-classes")
    raise ResourceLimit(f"{system.count_words(L)} cylinders exceed {max_words}")


def _markov_classes(measure: CylinderMeasure, L: int):
    """Weight classes of a 2-state chain indexed by first symbol, run count and zero count."""
    pi, Q = measure.start, measure.T
    with np.errstate(divide="ignore"):
        lQ = np.log(Q)
        lpi = np.log(pi)
    lw_all, lm_all = [], []
    z = np.arange(L + 1)
    for s0 in (0, 1):
        for R in range(1, L + 1):
            r_first = (R + 1) // 2
            r_second = R // 2
            r0, r1 = (r_first, r_second) if s0 == 0 else (r_second, r_first)
            ones = L - z
            ok = (z >= r0) & (ones >= r1) & ((r0 > 0) | (z == 0)) & ((r1 > 0) | (ones == 0))
            if not ok.any():
                continue
            zz, oo = z[ok], ones[ok]
            lm = np.zeros(len(zz))
            if r0 > 0:
                lm += np.array([_log_binom(a - 1, r0 - 1) for a in zz])
            if r1 > 0:
                lm += np.array([_log_binom(b - 1, r1 - 1) for b in oo])
            # every run except the first is entered by a change of symbol
            if s0 == 0:
                n01, n10 = r1, r0 - 1
            else:
                n01, n10 = r1 - 1, r0
            n00 = zz - r0
            n11 = oo - r1
            terms = lpi[s0] + np.where(n00 > 0, n00 * lQ[0, 0], 0.0) + np.where(n11 > 0, n11 * lQ[1, 1], 0.0)
            if n01:
                terms = terms + n01 * lQ[0, 1]
            if n10:
                terms = terms + n10 * lQ[1, 0]
            lw_all.append(terms)
            lm_all.append(lm)
    return np.concatenate(lw_all), np.concatenate(lm_all)


def measure_entropy(measure: CylinderMeasure) -> float:
    """Entropy ``-sum pi_u Q_uv log Q_uv`` of a Markov-type measure."""
    pi, Q = measure.stationary, measure.stochastic
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(Q > 0, Q * np.log(Q), 0.0)
    return float(-(pi[:, None] * terms).sum())
