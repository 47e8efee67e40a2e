"""Weak-Gibbs checks: ratio scans, envelopes between Gibbs times, density bounds.

For shift instances the ball ``B_eps(x, n)`` is the cylinder ``w`` of length
``L = n + m(eps)`` and the Birkhoff sum is taken over every window the cylinder
determines (``L - depth + 1`` terms when that is at least ``n``), so

    log_ratio = log mu[w] - (S phi(w) - n P).

Interval maps use the geometric potential ``-log Df`` whose conformal measure
is Lebesgue with ``P = 0``; ball measures come from exact pullbacks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InsufficientData, InvalidParameter, ResourceLimit
from .maps import GibbsTimeSeries, OrbitTrace, PiecewiseMap, pullback_offsets
from .measures import CylinderMeasure
from .symbolic import Potential, SftSystem, as_word, enumerate_words, prefix_length_for_radius
from .transfer import perron, transfer_matrix


def jacobian_check(measure: CylinderMeasure, potential: Potential, lam: float,
                   max_length: int = 12) -> float:
    """Largest ``|nu(sigma C) - lam e^{-phi(C)} nu(C)|`` over cylinders ``C`` up to ``max_length``."""
    system = measure.system
    worst = 0.0
    for n in range(max(potential.depth, 1), max_length + 1):
        for w in enumerate_words(system, n):
            if n >= 2:
                image = measure.weight(w[1:])
            else:
                image = math.fsum(measure.weight((b,)) for b in system.successors(w[0]))
            predicted = lam * math.exp(-potential(w)) * measure.weight(w)
            worst = max(worst, abs(image - predicted))
    return worst


# --- Gibbs reports -----------------------------------------------------------

@dataclass(frozen=True)
class GibbsReport:
    samples: list
    epsilon: float
    P: float
    band: float = 0.0

    @property
    def log_ratios(self) -> np.ndarray:
        return np.array([s[2] for s in self.samples])

    @property
    def log_K_upper(self) -> float:
        return float(self.log_ratios.max())

    @property
    def log_K_lower(self) -> float:
        return float(self.log_ratios.min())

    @property
    def K_upper(self) -> float:
        return math.exp(self.log_K_upper)

    @property
    def K_lower(self) -> float:
        return math.exp(self.log_K_lower)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.log_ratios)))


def _ball_sum(potential: Potential, w, n: int):
    """Determined part of the Birkhoff sum on ``[w]`` and the spread of the rest."""
    k = potential.depth
    if not potential.is_locally_constant:
        from .symbolic import birkhoff_sum
        value, err = birkhoff_sum(potential, w, n, with_error=True)
        return value, err
    determined = len(w) - k + 1
    total = math.fsum(potential(w[j: j + k]) for j in range(max(determined, 0)))
    if determined >= n:
        return total, 0.0
    from .transfer import _extensions
    need = n + k - 1 - len(w)
    vals = []
    for ext in _extensions(potential.system, w, need):
        full = w + ext
        vals.append(math.fsum(potential(full[j: j + k]) for j in range(determined, n)))
    lo, hi = min(vals), max(vals)
    return total + 0.5 * (lo + hi), 0.5 * (hi - lo)


def gibbs_report(measure: CylinderMeasure, potential: Potential, P: float, samples,
                 epsilon: float, max_depth: int = 4096) -> GibbsReport:
    """Exact log-ratios ``log mu(B_eps(x, n)) - (S phi - n P)`` at the given ``(word, n)`` samples."""
    m = prefix_length_for_radius(epsilon)
    out = []
    band = 0.0
    for i, (x, n) in enumerate(samples):
        L = n + m
        if L > max_depth:
            raise InsufficientData(f"cylinder depth {L} exceeds the supported {max_depth}")
        if len(x) < L:
            raise InsufficientData(f"sample {i} needs {L} symbols, got {len(x)}")
        w = as_word(x[:L])
        S, spread = _ball_sum(potential, w, n)
        out.append((i, int(n), measure.log_weight(w) - (S - n * P)))
        band = max(band, spread)
    if not out:
        raise InsufficientData("no samples")
    return GibbsReport(out, float(epsilon), float(P), band)


def _increments(measure: CylinderMeasure, potential: Potential):
    """Per-transition increments of ``log mu - S phi`` on the measure's states."""
    if measure.kind == "tabulated":
        raise InvalidParameter("exhaustive scans need a state-chain measure")
    s = measure.state_length
    k = potential.depth
    if k > s + 1:
        raise InvalidParameter("potential deeper than the measure's states allow")
    states = measure.states
    with np.errstate(divide="ignore"):
        logT = np.log(measure.T)
        init = np.log(measure.start)
        fin = np.log(measure.end)
    inc = np.full_like(logT, -np.inf)
    phi_init = np.zeros(len(states))
    for i, u in enumerate(states):
        if k <= s:
            # windows lying inside the first state
            phi_init[i] = math.fsum(potential(u[j: j + k]) for j in range(s - k + 1))
        for j, v in enumerate(states):
            if measure.T[i, j] > 0:
                window = (u + v[-1:])[-k:]
                inc[i, j] = logT[i, j] - potential(window)
    return init - phi_init, inc, fin


def gibbs_scan(measure: CylinderMeasure, potential: Potential, P: float, epsilon: float,
               n_max: int, max_words: int = 1 << 24):
    """Exhaustive scan over every admissible cylinder ``B_eps(x, n)``, ``n <= n_max``.

    Returns arrays ``(n, max log_ratio, min log_ratio)``. Requires that the
    cylinders resolve all ``n`` Birkhoff terms (``m(eps) >= depth - 1``).
    """
    m = prefix_length_for_radius(epsilon)
    if m < potential.depth - 1:
        raise InvalidParameter("scan needs epsilon small enough to resolve the potential")
    init, inc, fin = _increments(measure, potential)
    s = measure.state_length
    adj = measure.T > 0
    acc = init.copy()
    state = np.arange(len(init))
    keep = np.isfinite(acc)
    acc, state = acc[keep], state[keep]
    ns, highs, lows = [], [], []
    for L in range(s, n_max + m + 1):
        if L > s:
            rows, cols = np.nonzero(adj[state])
            if rows.size > max_words:
                raise ResourceLimit(f"{rows.size} cylinders of length {L} exceed {max_words}")
            acc = acc[rows] + inc[state[rows], cols]
            state = cols
        n = L - m
        if n >= 1:
            vals = acc + fin[state] + n * P
            ns.append(n)
            highs.append(float(vals.max()))
            lows.append(float(vals.min()))
    return np.array(ns), np.array(highs), np.array(lows)


def markov_gibbs_bound(system: SftSystem, potential: Potential, P: float, epsilon: float,
                       n: int) -> tuple:
    """Closed-form range of log-ratios for the equilibrium measure at time ``n``.

    With ``mu[w] = h(first) lam^{-(L-s)} prod W nu(last)`` the ratio only depends
    on the first and last states, which must be joined by a path of ``L - s`` steps.
    """
    m = prefix_length_for_radius(epsilon)
    tm = transfer_matrix(system, potential)
    sd = perron(tm)
    s = tm.state_length
    L = n + m
    if L < s:
        raise InsufficientData("cylinder shorter than a state")
    k = potential.depth
    last_term = np.array([potential(u) if k == 1 else 0.0 for u in tm.state_words])
    reach = np.linalg.matrix_power((tm.weights > 0).astype(np.int64), L - s) > 0 \
        if L - s < 64 else _reach_power((tm.weights > 0), L - s)
    base = np.log(sd.h)[:, None] + (np.log(sd.nu) - last_term)[None, :]
    vals = base - (L - s) * math.log(sd.lam) + n * P
    vals = vals[reach]
    return float(vals.min()), float(vals.max())


def _reach_power(adj: np.ndarray, steps: int) -> np.ndarray:
    r = np.eye(adj.shape[0], dtype=bool)
    a = adj.astype(bool)
    while steps:
        if steps & 1:
            r = (r.astype(np.int64) @ a.astype(np.int64)) > 0
        a = (a.astype(np.int64) @ a.astype(np.int64)) > 0
        steps >>= 1
    return r


def growth_slope(report: GibbsReport) -> float:
    """Least-squares slope of ``|log_ratio|`` against ``n``."""
    n = np.array([s[1] for s in report.samples], dtype=float)
    y = np.abs(report.log_ratios)
    if np.ptp(n) == 0:
        raise InsufficientData("need samples at different times")
    return float(np.polyfit(n, y, 1)[0])


# --- envelope -------------------------------------------------------------------

@dataclass(frozen=True)
class EnvelopeCheck:
    n: int
    n_prev: int
    n_next: int
    log_ratio: float
    log_bound: float
    alpha: float

    @property
    def slack(self) -> float:
        return self.log_bound - abs(self.log_ratio)

    @property
    def holds(self) -> bool:
        return self.slack >= -1e-12


def envelope_report(log_ratio_at: Callable[[int], float], times: GibbsTimeSeries, n: int,
                    alpha: float, log_K: float) -> EnvelopeCheck:
    """Check ``|log_ratio(n)| <= log K + alpha (n_{i+1} - n_i)`` between bracketing Gibbs times."""
    lo, hi = times.bracket(n)
    gap = hi - lo
    return EnvelopeCheck(int(n), lo, hi, float(log_ratio_at(n)), log_K + alpha * gap, alpha)


def shift_ratio_function(measure: CylinderMeasure, potential: Potential, P: float,
                         x: Sequence[int], epsilon: float) -> Callable[[int], float]:
    def at(n):
        return gibbs_report(measure, potential, P, [(x, n)], epsilon).samples[0][2]
    return at


def interval_ratio_function(fmap: PiecewiseMap, trace: OrbitTrace,
                            epsilon: float) -> Callable[[int], float]:
    """``log Leb(B_eps(x, n)) - S_n(-log Df)(x)`` using the exact pulled-back ball."""
    cums = np.concatenate([[0.0], np.cumsum(trace.log_inv_deriv)])

    def at(n):
        if n == 0:
            return math.log(2 * epsilon)
        ll, rr, _, _ = pullback_offsets(fmap, trace, n, epsilon, clip=epsilon)
        return float(np.logaddexp(ll[0], rr[0]) - cums[n])
    return at


def interval_gibbs_report(fmap: PiecewiseMap, trace: OrbitTrace, times: GibbsTimeSeries,
                          epsilon: float, limit: int | None = None) -> GibbsReport:
    """Log-ratios at recorded Gibbs times (and time 0) for the geometric potential."""
    at = interval_ratio_function(fmap, trace, epsilon)
    chosen = [0] + [int(t) for t in times.times if limit is None or t <= limit]
    return GibbsReport([(i, n, at(n)) for i, n in enumerate(chosen)], epsilon, 0.0)


def geometric_alpha(fmap: PiecewiseMap) -> float:
    """``sup |log Df| + P`` with ``P = 0``."""
    lo, hi = fmap.slope_bounds
    return max(abs(math.log(lo)), abs(math.log(hi)))


# --- densities and Cesaro averages --------------------------------------------------

@dataclass(frozen=True)
class DensityBounds:
    h_min: float
    h_max: float

    @property
    def K1(self) -> float:
        return self.h_max / self.h_min


def density_bounds(system: SftSystem, potential: Potential) -> DensityBounds:
    sd = perron(transfer_matrix(system, potential))
    return DensityBounds(float(sd.h.min()), float(sd.h.max()))


def cesaro_compare(system: SftSystem, potential: Potential, n_max: int, length: int = 6,
                   every: int = 1) -> np.ndarray:
    """Total variation between ``(1/n) sum_{j<n} sigma^j_* nu`` and ``mu`` on ``length``-cylinders.

    ``sigma^j_* nu[w] = (start T^j)[first state of w] * chain(w)``, so the
    average only changes the starting vector. Returns an array of shape
    ``(k, 2)`` of ``(n, distance)``.
    """
    from .transfer import conformal_measure, equilibrium_measure
    sd = perron(transfer_matrix(system, potential))
    nu = conformal_measure(system, potential, spectral=sd)
    mu = equilibrium_measure(system, potential, spectral=sd)
    if length < nu.state_length:
        raise InvalidParameter("cylinder length shorter than a state")
    words = list(enumerate_words(system, length))
    first = np.array([nu.index[w[: nu.state_length]] for w in words])
    tail = np.array([nu.weight(w) / nu.start[nu.index[w[: nu.state_length]]] for w in words])
    target = np.array([mu.weight(w) for w in words])
    row = nu.start.copy()
    running = np.zeros_like(row)
    out = []
    for n in range(1, n_max + 1):
        running += row
        row = row @ nu.T
        if n % every == 0 or n == n_max:
            avg = running / n
            out.append((n, 0.5 * float(np.abs(avg[first] * tail - target).sum())))
    return np.array(out)
