"""Contracting skew products ``F(x, y) = (sigma x, lam y + tau(x_0))`` over an SFT.

The fiber is ``[0, D]``; the section is the fiber point 0 for every base point,
and the product metric is ``max(d_base, |y - y'|)`` so the holonomy constant is
``C = 2``. Fiber-dependent potentials are reduced to base potentials through the
series ``u(x, y) = sum_j [phi(F^j(x, y)) - phi(F^j(x, 0))]``, evaluated in
extended precision and truncated after ``J`` terms with an explicit tail bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np

from .errors import InsufficientData, InvalidParameter, NumericFailure
from .gibbs import GibbsReport
from .measures import CylinderMeasure
from .symbolic import (Potential, SftSystem, as_word, enumerate_words,
                       prefix_length_for_radius)
from .transfer import PressureEstimate, pressure

DEFAULT_J = 60
MP_DPS = 60


@dataclass(frozen=True, eq=False)
class SkewSystem:
    base: SftSystem
    fiber_rate: float
    fiber_translation: tuple
    fiber_diameter: float = 1.0
    holonomy_constant: float = 2.0
    section: float = 0.0

    def __post_init__(self):
        lam = self.fiber_rate
        if not 0 < lam < 1:
            raise InvalidParameter(f"fiber rate must lie in (0, 1), got {lam}")
        tau = tuple(float(t) for t in self.fiber_translation)
        object.__setattr__(self, "fiber_translation", tau)
        if len(tau) != self.base.alphabet_size:
            raise InvalidParameter("need one fiber translation per base symbol")
        D = self.fiber_diameter
        if min(tau) < 0 or lam * D + max(tau) > D * (1 + 1e-15):
            raise InvalidParameter("fiber maps must send [0, D] into itself")
        if self.holonomy_constant < 1:
            raise InvalidParameter("holonomy constant must be >= 1")

    def fiber_map(self, a: int, y):
        return self.fiber_rate * y + self.fiber_translation[a]

    def __call__(self, x: Sequence[int], y: float):
        """One step of F on (finite word, fiber point)."""
        x = as_word(x)
        return x[1:], self.fiber_map(x[0], y)

    def fiber_orbit(self, x: Sequence[int], y, n: int, mp: bool = False) -> list:
        """Fiber coordinates ``y_0 .. y_{n-1}`` along the orbit of ``(x, y)``."""
        lam = mpmath.mpf(self.fiber_rate) if mp else self.fiber_rate
        tau = [mpmath.mpf(t) for t in self.fiber_translation] if mp else self.fiber_translation
        out = [y]
        for j in range(n - 1):
            out.append(lam * out[-1] + tau[x[j]])
        return out

    def fiber_cell(self, past: Sequence[int]) -> tuple:
        """Interval ``g_{v_{d-1}} o ... o g_{v_0}([0, D])`` for the past word ``v``."""
        lo, hi = 0.0, self.fiber_diameter
        for a in past:
            lo, hi = self.fiber_map(a, lo), self.fiber_map(a, hi)
        return lo, hi

    def product_distance(self, base_distance: float, fiber_distance: float) -> float:
        return max(base_distance, fiber_distance)


def cantor_skew() -> SkewSystem:
    """Full 2-shift base with ``lam = 1/3`` and ``tau = (0, 2/3)``: the middle-thirds fiber."""
    return SkewSystem(SftSystem.full_shift(2), 1.0 / 3.0, (0.0, 2.0 / 3.0))


@dataclass(frozen=True, eq=False)
class FiberPotential:
    """``phi(x, y) = base_part(x) + fiber_part(x, y)``.

    ``fiber_part(word, y)`` must accept mpmath numbers and depend on at most
    ``fiber_depth`` leading symbols. ``holder = (c_phi, a)`` bounds
    ``|fiber_part(w, y) - fiber_part(w, y')| <= c_phi |y - y'|**a``. When the
    fiber part is ``affine_slope * y + (term in w)`` pass ``affine_slope``.
    """
    base_part: Potential
    fiber_part: Callable
    holder: tuple = (1.0, 1.0)
    fiber_depth: int = 0
    affine_slope: float | None = None
    fiber_sup: float | None = None

    @classmethod
    def base_only(cls, base_part: Potential) -> "FiberPotential":
        return cls(base_part, lambda w, y: 0 * y, holder=(0.0, 1.0), affine_slope=0.0,
                   fiber_sup=0.0)

    @classmethod
    def linear(cls, base_part: Potential, slope: float) -> "FiberPotential":
        return cls(base_part, lambda w, y: slope * y, holder=(abs(slope), 1.0),
                   affine_slope=slope)

    def value(self, x: Sequence[int], y) -> float:
        return self.base_part(x) + self.fiber_part(as_word(x), y)

    def sup_fiber(self, skew: SkewSystem) -> float:
        if self.fiber_sup is not None:
            return self.fiber_sup
        c, a = self.holder
        ys = np.linspace(0, skew.fiber_diameter, 65)
        depth = max(self.fiber_depth, 1)
        vals = [abs(float(self.fiber_part(w, y))) for w in enumerate_words(skew.base, depth)
                for y in ys]
        return max(vals) + c * (skew.fiber_diameter / 128) ** a


def _extend(system: SftSystem, w, length: int):
    """Extend ``w`` to ``length`` symbols with the smallest admissible successors."""
    w = list(w)
    if not w:
        w = [0]
    while len(w) < length:
        succ = system.successors(w[-1])
        if not succ:
            raise InsufficientData("word cannot be extended")
        w.append(succ[0])
    return tuple(w)


def cohomology_tail(skew: SkewSystem, phi: FiberPotential, J: int) -> float:
    c, a = phi.holder
    lam = skew.fiber_rate
    return c * skew.fiber_diameter ** a * lam ** (a * J) / (1 - lam ** a)


def u_sup_bound(skew: SkewSystem, phi: FiberPotential, J: int) -> float:
    """Bound on ``|u_J|``: ``c D^a (1 - lam^{aJ}) / (1 - lam^a)``."""
    c, a = phi.holder
    lam = skew.fiber_rate
    return c * skew.fiber_diameter ** a * (1 - lam ** (a * J)) / (1 - lam ** a)


def cohomology_u(skew: SkewSystem, phi: FiberPotential, point, J: int = DEFAULT_J):
    """Partial sum ``u_J`` at ``point = (word, y)`` and the tail bound ``|u - u_J|``."""
    if J < 1:
        raise InvalidParameter("J must be >= 1")
    word, y = point
    x = _extend(skew.base, as_word(word), J + phi.fiber_depth + 1)
    with mpmath.workdps(MP_DPS):
        value = _u_mp(skew, phi, x, mpmath.mpf(y), J)
        out = float(value)
    return out, cohomology_tail(skew, phi, J)


def _u_mp(skew, phi, x, y, J):
    ys = skew.fiber_orbit(x, y, J, mp=True)
    rs = skew.fiber_orbit(x, mpmath.mpf(skew.section), J, mp=True)
    total = mpmath.mpf(0)
    for j in range(J):
        total += phi.fiber_part(x[j:], ys[j]) - phi.fiber_part(x[j:], rs[j])
    return total


@dataclass(frozen=True)
class FiberCertificate:
    spread: float
    tail: float

    @property
    def certified(self) -> bool:
        return self.spread <= 2 * self.tail


def induced_value(skew: SkewSystem, phi: FiberPotential, word, J: int = DEFAULT_J,
                  fiber_samples: int = 5):
    """``phi - u_J + u_J o F`` at base point ``word`` and several fiber points.

    Returns ``(value at the section, spread over the fiber samples)`` computed in
    extended precision.
    """
    x = _extend(skew.base, as_word(word), J + phi.fiber_depth + 2)
    with mpmath.workdps(MP_DPS):
        vals = []
        ys = [mpmath.mpf(skew.section)] + [mpmath.mpf(skew.fiber_diameter) * i / (fiber_samples - 1)
                                           for i in range(fiber_samples)]
        base = mpmath.mpf(phi.base_part(x))
        for y in ys:
            fy = skew.fiber_map(x[0], y)
            v = (base + phi.fiber_part(x, y) - _u_mp(skew, phi, x, y, J)
                 + _u_mp(skew, phi, x[1:], fy, J))
            vals.append(v)
        spread = max(vals) - min(vals)
        return float(vals[0]), float(spread)


def induce_base_potential(skew: SkewSystem, phi: FiberPotential, J: int = DEFAULT_J) -> Potential:
    """Sampled base potential equal to ``phi`` up to the coboundary ``u_J o F - u_J``.

    The fiber-constancy spread is certified against ``2 * tail`` at every
    evaluation; a spread above ``3 * tail`` means the holonomy or section setup
    is wrong and raises :class:`NumericFailure`.
    """
    tail = cohomology_tail(skew, phi, J)
    cache: dict = {}
    worst = [0.0]
    need = J + phi.fiber_depth + 2

    def sampler(w):
        key = _extend(skew.base, w, need)[:need]
        if key not in cache:
            value, spread = induced_value(skew, phi, key, J)
            if spread > 3 * tail + 1e-300:
                raise NumericFailure("induce_base_potential", spread,
                                     f"fiber spread {spread:.3e} exceeds 3*tail {3 * tail:.3e}")
            worst[0] = max(worst[0], spread)
            cache[key] = value
        return cache[key]

    c, a = phi.holder
    lam = skew.fiber_rate
    tau_max = max(skew.fiber_translation)
    base = phi.base_part

    def variation(n):
        v = base.variation(n)
        if phi.affine_slope is not None:
            # affine fibers: the induced term depends on x_0 and the fiber depth only
            return v + (2 * tail if n >= phi.fiber_depth + 1 else 2 * (phi.sup_fiber(skew)
                                                                        + u_sup_bound(skew, phi, J)))
        k = n - phi.fiber_depth
        if k < 1:
            return v + 2 * (phi.sup_fiber(skew) + u_sup_bound(skew, phi, J))
        return v + 2 * c * tau_max ** a * lam ** (a * (k - 1)) / (1 - lam ** a) + 2 * tail

    sup = base.sup_norm + phi.sup_fiber(skew) + u_sup_bound(skew, phi, J) + tail
    pot = Potential(skew.base, "sampled", sampler=sampler, variation_bound=variation,
                    sup_norm=sup, name="induced")
    pot.certificate = lambda: FiberCertificate(worst[0], tail)
    pot.tail = tail
    return pot


# --- lifted measures -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LiftedMeasure:
    """F-invariant lift: ``weight([w] x I_v) = mu[v w]`` for past ``v`` and future ``w``."""
    skew: SkewSystem
    base_measure: CylinderMeasure

    def weight(self, past, future) -> float:
        return self.base_measure.weight(as_word(past) + as_word(future))

    def cell(self, past) -> tuple:
        return self.skew.fiber_cell(past)

    def cells(self, future, depth: int) -> list:
        """``(past, fiber interval, weight)`` for every depth-``depth`` past of ``future``."""
        out = []
        for v in _words_or_empty(self.skew.base, depth):
            wt = self.weight(v, future)
            if wt > 0:
                out.append((v, self.cell(v), wt))
        return out

    def project(self, future, depth: int) -> float:
        return math.fsum(c[2] for c in self.cells(future, depth))

    def fiber_marginal(self, depth: int) -> dict:
        return {v: self.weight(v, ()) for v in enumerate_words(self.skew.base, depth)}


def _words_or_empty(system, depth):
    if depth == 0:
        return [()]
    return list(enumerate_words(system, depth))


def lift_measure(skew: SkewSystem, mu_base: CylinderMeasure) -> LiftedMeasure:
    if mu_base.system is not skew.base and not np.array_equal(
            mu_base.system.transitions, skew.base.transitions):
        raise InvalidParameter("measure lives on a different base system")
    return LiftedMeasure(skew, mu_base)


# --- pressure equality -----------------------------------------------------------

@dataclass(frozen=True)
class PressureEqualityReport:
    base: PressureEstimate
    attractor_lower: float
    attractor_upper: float
    tolerance: float
    fiber_depth: int

    @property
    def overlap(self) -> bool:
        t = self.tolerance
        return self.base.lower - t <= self.attractor_upper and self.attractor_lower - t <= self.base.upper


def _fiber_depth_for(skew: SkewSystem, epsilon: float) -> int:
    d = 0
    while skew.fiber_rate ** d * skew.fiber_diameter > epsilon:
        d += 1
    return d


def attractor_pressure_bracket(skew: SkewSystem, phi: FiberPotential, n: int,
                               epsilon: float = 0.5) -> tuple:
    """Bracket for the attractor pressure from sums over product cells.

    Cells are ``[w] x I_v`` with ``w`` an ``n``-cylinder and ``I_v`` a fiber
    interval of diameter ``<= epsilon`` (``v`` ranges over depth-``d`` pasts).
    The upper end sums ``exp(sup S_n phi)`` over all cells; the lower end keeps
    one point per base cylinder and glues blocks as in the base bracket.
    """
    base = skew.base
    p = base.primitivity_power
    if p is None:
        raise InvalidParameter("attractor bracket needs a primitive base")
    d = _fiber_depth_for(skew, epsilon)
    c, a = phi.holder
    k = phi.base_part.depth
    lam = skew.fiber_rate
    fd = max(phi.fiber_depth, 1)
    ext_len = n + max(k, fd) - 1
    pasts = _words_or_empty(base, d)
    cells = [skew.fiber_cell(v) for v in pasts]
    lo_ends = np.array([cl[0] for cl in cells])
    hi_ends = np.array([cl[1] for cl in cells])
    width = float(np.max(hi_ends - lo_ends)) if cells else skew.fiber_diameter
    probes = np.linspace(0.0, 1.0, 3)
    slack = c * (width / 2) ** a * sum(lam ** (a * j) for j in range(n))
    sup_by_w: dict = {}
    inf_by_w: dict = {}
    for x in enumerate_words(base, ext_len):
        w = x[:n]
        base_sum = math.fsum(phi.base_part(x[j: j + k]) for j in range(n))
        # fiber coordinates along the orbit are affine in the starting point y
        sums = []
        for t in probes:
            y0 = lo_ends + t * (hi_ends - lo_ends)
            y = y0.copy()
            acc = np.zeros_like(y)
            for j in range(n):
                acc += np.array([float(phi.fiber_part(x[j:], yy)) for yy in y])
                y = lam * y + skew.fiber_translation[x[j]]
            sums.append(acc)
        sums = np.array(sums)
        hi = base_sum + sums.max(axis=0) + slack
        lo = base_sum + sums.min(axis=0) - slack
        prev = sup_by_w.get(w)
        sup_by_w[w] = hi if prev is None else np.maximum(prev, hi)
        prev = inf_by_w.get(w)
        inf_by_w[w] = float(lo.min()) if prev is None else min(prev, float(lo.min()))
    all_hi = np.concatenate(list(sup_by_w.values()))
    top = all_hi.max()
    upper = (top + math.log(np.exp(all_hi - top).sum())) / n
    lows = np.array(list(inf_by_w.values()))
    top = lows.max()
    log_z = top + math.log(np.exp(lows - top).sum())
    sup_phi = phi.base_part.sup_norm + phi.sup_fiber(skew)
    lower = (log_z - (p - 1) * sup_phi) / (n + p - 1)
    return lower, upper, d


def pressure_equality_check(skew: SkewSystem, phi: FiberPotential, J: int = DEFAULT_J,
                            n: int = 12, epsilon: float = 0.5,
                            approx_depth: int = 8) -> PressureEqualityReport:
    """Compare the base bracket for the induced potential with the attractor bracket."""
    induced = induce_base_potential(skew, phi, J)
    base = pressure(skew.base, induced, "finite_n", n=n, epsilon=epsilon, approx_depth=approx_depth)
    lower, upper, d = attractor_pressure_bracket(skew, phi, n, epsilon)
    tol = 2 * u_sup_bound(skew, phi, J) / n + 2 * cohomology_tail(skew, phi, J)
    return PressureEqualityReport(base, lower, upper, tol, d)


# --- attractor Gibbs ratios ------------------------------------------------------

@dataclass(frozen=True)
class AttractorGibbsReport:
    attractor: GibbsReport
    base: GibbsReport
    max_difference: float
    allowed: float
    holonomy_constant: float
    fiber_cover: float

    @property
    def within_bound(self) -> bool:
        return self.max_difference <= self.allowed


def attractor_gibbs_report(skew: SkewSystem, phi: FiberPotential, lifted: LiftedMeasure,
                           samples, epsilon: float, P: float, J: int = DEFAULT_J,
                           induced: Potential | None = None) -> AttractorGibbsReport:
    """Log-ratios for the lifted measure on product dynamical balls.

    ``samples`` are ``(past, future, n)``: the point is ``(future, y)`` with
    ``y`` the midpoint of the fiber cell of ``past``. With ``epsilon >= D`` the
    fiber ball is the whole fiber, so the product ball is ``[w] x fiber`` and
    its lifted mass is the base mass of ``w``.
    """
    m = prefix_length_for_radius(epsilon)
    if epsilon < skew.fiber_diameter:
        raise InvalidParameter("product balls are resolved only for epsilon >= fiber diameter")
    induced = induced or induce_base_potential(skew, phi, J)
    k = phi.base_part.depth
    att, bas = [], []
    diff = 0.0
    for i, (past, future, n) in enumerate(samples):
        L = n + m
        x = as_word(future)
        if len(x) < max(L, n + max(k, phi.fiber_depth + 1) - 1):
            raise InsufficientData(f"sample {i} needs more future symbols")
        lo, hi = skew.fiber_cell(past)
        y = 0.5 * (lo + hi)
        ys = skew.fiber_orbit(x, y, n)
        S_att = math.fsum(phi.base_part(x[j: j + k]) + float(phi.fiber_part(x[j:], ys[j]))
                          for j in range(n))
        S_base = math.fsum(induced(x[j:]) for j in range(n))
        log_mass = lifted.base_measure.log_weight(x[:L])
        att.append((i, int(n), log_mass - (S_att - n * P)))
        bas.append((i, int(n), log_mass - (S_base - n * P)))
        diff = max(diff, abs(att[-1][2] - bas[-1][2]))
    allowed = 2 * u_sup_bound(skew, phi, J) + 2 * cohomology_tail(skew, phi, J)
    return AttractorGibbsReport(GibbsReport(att, epsilon, P), GibbsReport(bas, epsilon, P),
                                diff, allowed, skew.holonomy_constant,
                                min(1.0, skew.fiber_diameter / epsilon))
