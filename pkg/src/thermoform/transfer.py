"""Transfer operators, Perron data, conformal/equilibrium measures and pressure.

States of the transfer matrix are the admissible words of length
``s = max(depth - 1, 1)``. ``W[u, v] = exp(phi(u + v[-1]))`` (for depth 1 the
exponent is ``phi(u[0])``) when ``v`` is the shift-extension of ``u``. The
transfer operator acting on functions of the state is ``W.T``; its Perron
eigenvector ``h`` solves ``W.T h = lam h`` and the conformal state weights
``nu`` solve ``W nu = lam nu``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import InsufficientData, InvalidParameter, InvalidSystem, NumericFailure
from .measures import CylinderMeasure
from .symbolic import Potential, SftSystem, Word, enumerate_words, prefix_length_for_radius

DEFAULT_TOL = 1e-12
MAX_ITER = 1_000_000


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    system: SftSystem
    potential: Potential
    state_words: list
    weights: np.ndarray

    @property
    def state_length(self) -> int:
        return len(self.state_words[0])

    @property
    def adjacency(self) -> np.ndarray:
        return (self.weights > 0).astype(np.int8)


@dataclass(frozen=True, eq=False)
class SpectralData:
    lam: float
    h: np.ndarray
    nu: np.ndarray
    residual: float
    iterations: int
    states: list = field(repr=False)

    @property
    def pressure(self) -> float:
        return math.log(self.lam)


def _window_value(potential: Potential, u: Word, v: Word) -> float:
    if potential.depth == 1:
        return potential(u[:1])
    return potential(u + v[-1:])


def transfer_matrix(system: SftSystem, potential: Potential) -> TransferMatrix:
    """Matrix realizing the transfer operator on functions of ``s``-word states."""
    if not potential.is_locally_constant:
        raise InvalidParameter("transfer_matrix needs a locally constant potential; "
                               "use finite-n pressure for sampled potentials")
    s = max(potential.depth - 1, 1)
    states = list(enumerate_words(system, s))
    if not states:
        raise InvalidSystem(f"system has no admissible words of length {s}")
    index = {u: i for i, u in enumerate(states)}
    W = np.zeros((len(states), len(states)))
    for i, u in enumerate(states):
        for b in system.successors(u[-1]):
            v = u[1:] + (b,)
            j = index.get(v)
            if j is None:
                continue  # dead end in a non-strict sub-SFT
            W[i, j] = math.exp(_window_value(potential, u, v))
    return TransferMatrix(system, potential, states, W)


def _is_irreducible(adj: np.ndarray) -> bool:
    n, _ = connected_components(adj, directed=True, connection="strong")
    return n == 1 and bool(adj.any())


def _power_iterate(M: np.ndarray, tol: float, max_iter: int):
    """Perron vector of ``M`` (rows act on vectors) normalized in sup norm."""
    x = np.ones(M.shape[0])
    lam = 0.0
    residual = math.inf
    for it in range(1, max_iter + 1):
        y = M @ x
        lam = float(np.max(np.abs(y)))
        if lam == 0:
            raise InvalidSystem("matrix is nilpotent on the start vector")
        residual = float(np.max(np.abs(y - lam * x))) / float(np.max(np.abs(x)))
        x = y / lam
        if residual <= tol * max(1.0, lam):
            # polish: keep iterating while the residual still drops
            for _ in range(200):
                y = M @ x
                lam_new = float(np.max(y))
                new_res = float(np.max(np.abs(y - lam_new * x)))
                if new_res >= 0.5 * residual:
                    break
                x, residual = y / lam_new, new_res
            y = M @ x
            lam = float(np.max(y))
            residual = float(np.max(np.abs(y - lam * x)))
            return lam, x, residual, it
    raise NumericFailure("perron", residual)


def perron(matrix: TransferMatrix | np.ndarray, tol: float = DEFAULT_TOL,
           max_iter: int = MAX_ITER) -> SpectralData:
    """Perron eigenvalue and eigenvectors by deterministic power iteration."""
    if tol <= 0:
        raise InvalidParameter("tol must be positive")
    W = matrix.weights if isinstance(matrix, TransferMatrix) else np.asarray(matrix, dtype=float)
    states = matrix.state_words if isinstance(matrix, TransferMatrix) else list(range(W.shape[0]))
    if np.any(W < 0):
        raise InvalidSystem("transfer weights must be nonnegative")
    adj = (W > 0).astype(np.int8)
    if not _is_irreducible(adj):
        raise InvalidSystem("transfer matrix is reducible")
    from .symbolic import _primitivity_power
    # periodic matrices need a shift to make the power iteration converge
    shift = 0.0 if _primitivity_power(adj) is not None else float(np.max(W.sum(axis=1)))
    Wshift = W + shift * np.eye(W.shape[0])
    lam_h, h, res_h, it_h = _power_iterate(Wshift.T, tol, max_iter)
    lam_n, nu, res_n, it_n = _power_iterate(Wshift, tol, max_iter)
    lam = 0.5 * (lam_h + lam_n) - shift
    if np.min(h) <= 0 or np.min(nu) <= 0:
        raise NumericFailure("perron", 0.0, "eigenvector lost positivity")
    nu = nu / nu.sum()
    h = h / float(nu @ h)
    residual = float(np.max(np.abs(W.T @ h - lam * h)) / np.max(h))
    return SpectralData(lam, h, nu, residual, max(it_h, it_n), states)


def conformal_measure(system: SftSystem, potential: Potential, tol: float = DEFAULT_TOL,
                      spectral: SpectralData | None = None) -> CylinderMeasure:
    """Eigenmeasure of the dual transfer operator, with closed-form cylinder weights."""
    tm = transfer_matrix(system, potential)
    sd = spectral or perron(tm, tol)
    return CylinderMeasure("conformal", system, states=tm.state_words,
                           start=np.ones(len(sd.nu)), T=tm.weights / sd.lam, end=sd.nu,
                           info={"lambda": sd.lam, "residual": sd.residual})


def equilibrium_measure(system: SftSystem, potential: Potential, tol: float = DEFAULT_TOL,
                        spectral: SpectralData | None = None) -> CylinderMeasure:
    """Invariant Markov measure ``h * nu`` on ``s``-word states."""
    tm = transfer_matrix(system, potential)
    sd = spectral or perron(tm, tol)
    pi = sd.h * sd.nu
    Q = tm.weights * sd.nu[None, :] / (sd.lam * sd.nu[:, None])
    info = {"lambda": sd.lam, "h_min": float(sd.h.min()), "h_max": float(sd.h.max()),
            "residual": sd.residual}
    return CylinderMeasure("markov", system, states=tm.state_words, start=pi, T=Q,
                           end=np.ones(len(pi)), info=info)


def conformal_by_iteration(system: SftSystem, potential: Potential, n: int,
                           tol: float = 1e-14, max_iter: int = 100_000):
    """Fixed point of the normalized dual operator on length-``n`` cylinder weights.

    Independent of the closed form: iterates ``eta[w] <- exp(phi(w)) eta[sigma w]``
    and renormalizes. Returns ``(lam, {word: weight})``.
    """
    if n < potential.depth:
        raise InvalidParameter("cylinder length must reach the potential depth")
    words = list(enumerate_words(system, n))
    index = {w: i for i, w in enumerate(words)}
    gain = np.array([math.exp(potential(w)) for w in words])
    # eta[sigma w] = sum of eta over length-n words extending w[1:]
    rows, cols = [], []
    for i, w in enumerate(words):
        for b in system.successors(w[-1]):
            j = index.get(w[1:] + (b,))
            if j is not None:
                rows.append(i)
                cols.append(j)
    from scipy.sparse import csr_matrix
    S = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(words), len(words)))
    eta = np.full(len(words), 1.0 / len(words))
    lam = 0.0
    for _ in range(max_iter):
        new = gain * (S @ eta)
        lam = float(new.sum())
        new /= lam
        if np.max(np.abs(new - eta)) < tol:
            eta = new
            break
        eta = new
    else:
        raise NumericFailure("conformal_by_iteration", float(np.max(np.abs(new - eta))))
    return lam, dict(zip(words, eta.tolist()))


# pressure -----------------------------------------------------------------

@dataclass(frozen=True)
class PressureEstimate:
    """Finite-n pressure estimate with a two-sided bracket around the limit."""
    value: float
    lower: float
    upper: float
    n: int
    epsilon: float

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= x <= self.upper + slack

    def overlaps(self, other: "PressureEstimate", slack: float = 0.0) -> bool:
        return self.lower - slack <= other.upper and other.lower - slack <= self.upper


def _tail_extremes(system: SftSystem, potential: Potential, states):
    """Per state u (last k-1 symbols), max/min over extensions of the windows that start in u."""
    k = potential.depth
    if k == 1:
        return np.zeros(len(states)), np.zeros(len(states))
    hi = np.full(len(states), -math.inf)
    lo = np.full(len(states), math.inf)
    for i, u in enumerate(states):
        for ext in _extensions(system, u, k - 1):
            full = u + ext
            val = math.fsum(potential(full[j: j + k]) for j in range(k - 1))
            hi[i] = max(hi[i], val)
            lo[i] = min(lo[i], val)
    return hi, lo


def _extensions(system, u, length):
    def rec(prefix):
        if len(prefix) == length:
            yield tuple(prefix)
            return
        last = prefix[-1] if prefix else u[-1]
        for b in system.successors(last):
            prefix.append(b)
            yield from rec(prefix)
            prefix.pop()
    yield from rec([])


def _log_partition(system: SftSystem, potential: Potential, n: int, which: str) -> float:
    """log of sum over n-cylinders of exp(sup or inf of S_n phi on the cylinder)."""
    k = potential.depth
    s = max(k - 1, 1)
    if n < s:
        raise InsufficientData(f"n={n} shorter than the state length {s}")
    tm = transfer_matrix(system, potential)
    states = tm.state_words
    W = tm.weights
    if k == 1:
        z = np.array([math.exp(potential(u)) for u in states])
        step = np.array([[math.exp(potential(v)) if W[i, j] > 0 else 0.0
                          for j, v in enumerate(states)] for i in range(len(states))])
    else:
        z = np.ones(len(states))
        step = W
    log_scale = 0.0
    for _ in range(n - s):
        z = z @ step
        top = z.max()
        if top <= 0:
            return -math.inf
        log_scale += math.log(top)
        z = z / top
    hi, lo = _tail_extremes(system, potential, states)
    tail = hi if which == "sup" else lo
    with np.errstate(divide="ignore"):
        terms = np.log(z) + tail
    terms = terms[np.isfinite(terms)]
    if terms.size == 0:
        return -math.inf
    top = terms.max()
    return log_scale + top + math.log(np.exp(terms - top).sum())


def pressure(system: SftSystem, potential: Potential, mode: str = "spectral", n: int | None = None,
             epsilon: float = 1.0, tol: float = DEFAULT_TOL, approx_depth: int = 10):
    """Topological pressure.

    ``mode='spectral'`` returns ``log lam`` for locally constant potentials.
    ``mode='finite_n'`` returns a :class:`PressureEstimate`: the value is
    ``(1/n) log sum exp(sup S_n phi)`` over n-cylinders (an upper bound by
    submultiplicativity) and the lower end comes from gluing n-blocks through
    connectors of length ``p - 1`` (``p`` the primitivity power).
    """
    if mode == "spectral":
        if not potential.is_locally_constant:
            raise InvalidParameter("spectral pressure needs a locally constant potential")
        return perron(transfer_matrix(system, potential), tol).pressure
    if mode != "finite_n":
        raise InvalidParameter(f"unknown pressure mode {mode!r}")
    if n is None or n < 1:
        raise InvalidParameter("finite_n pressure needs n >= 1")
    prefix_length_for_radius(epsilon)  # validates epsilon
    slack = 0.0
    if not potential.is_locally_constant:
        slack = potential.variation(approx_depth)
        potential = potential.locally_constant_part(approx_depth)
    p = system.primitivity_power
    if p is None:
        raise InvalidSystem("finite-n bracket needs a primitive system")
    upper = _log_partition(system, potential, n, "sup") / n
    lower_raw = _log_partition(system, potential, n, "inf")
    lower = (lower_raw - (p - 1) * potential.sup_norm) / (n + p - 1)
    return PressureEstimate(upper + slack, lower - slack, upper + slack, n, epsilon)


def restrict_potential(potential: Potential, sub: SftSystem) -> Potential:
    return Potential.table(sub, potential.depth, lambda w: potential(w), name=potential.name)


def _spectral_radius_reducible(W: np.ndarray, tol: float) -> float:
    if not W.any():
        return 0.0
    n_comp, labels = connected_components((W > 0).astype(np.int8), directed=True,
                                          connection="strong")
    best = 0.0
    for c in range(n_comp):
        idx = np.flatnonzero(labels == c)
        block = W[np.ix_(idx, idx)]
        if not block.any():
            continue
        best = max(best, perron(block, tol).lam)
    return best


def relative_pressure_subshift(system: SftSystem, potential: Potential, sub: SftSystem,
                               tol: float = DEFAULT_TOL) -> float:
    """Pressure of ``potential`` restricted to an invariant sub-SFT (-inf if empty)."""
    if not system.contains(sub):
        raise InvalidSystem("sub-SFT allows transitions the ambient system forbids")
    if not potential.is_locally_constant:
        raise InvalidParameter("relative pressure needs a locally constant potential")
    if not list(enumerate_words(sub, max(potential.depth, 1))):
        return -math.inf
    restricted = restrict_potential(potential, sub)
    tm = transfer_matrix(sub, restricted)
    rho = _spectral_radius_reducible(tm.weights, tol)
    return math.log(rho) if rho > 0 else -math.inf


def cover_sum(system: SftSystem, potential: Potential, sub: SftSystem, epsilon: float,
              N: int, gamma: float) -> float:
    """log of the cover sum ``sum exp(-gamma N + sup S_N phi)`` over the (N, eps)-balls of ``sub``."""
    if N > 16:
        raise InvalidParameter("cover sums are enumerated only for N <= 16")
    m = prefix_length_for_radius(epsilon)
    restricted = restrict_potential(potential, sub)
    k = potential.depth
    L = N + m
    best: dict = {}
    # sup of S_N over the ball = max over admissible extensions resolving all windows
    length = max(L, N + k - 1)
    for w in enumerate_words(sub, length):
        val = math.fsum(restricted(w[j: j + k]) for j in range(N))
        key = w[:L]
        if val > best.get(key, -math.inf):
            best[key] = val
    if not best:
        return -math.inf
    vals = np.array(list(best.values())) - gamma * N
    top = vals.max()
    return float(top + math.log(np.exp(vals - top).sum()))


def cover_sum_pressure(system: SftSystem, potential: Potential, sub: SftSystem,
                       epsilon: float, N: int, iterations: int = 60) -> float:
    """Critical gamma of the cover sum, located by bisection."""
    lo = potential.min()
    hi = relative_pressure_subshift(system, potential, sub) + potential.max() + 1
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if cover_sum(system, potential, sub, epsilon, N, mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class PressureGapReport:
    P_good: float
    P_bad: float
    gap: float
    holds: bool
    lipschitz_margin: float
    tolerance: float


def check_pressure_gap(system: SftSystem, potential: Potential, good: SftSystem | None,
             bad: SftSystem | None, tol: float = 1e-9) -> PressureGapReport:
    """Compare the pressure on the good sub-SFT with the pressure on the bad one.

    ``good=None`` means the whole system; ``bad=None`` means the empty set.
    Any ``psi`` with ``|psi - phi|_inf < gap / 2`` keeps the strict inequality.
    """
    P_good = (pressure(system, potential, tol=tol * 1e-3) if good is None
              else relative_pressure_subshift(system, potential, good))
    P_bad = -math.inf if bad is None else relative_pressure_subshift(system, potential, bad)
    gap = P_good - P_bad
    margin = gap / 2 if math.isfinite(gap) else math.inf
    return PressureGapReport(P_good, P_bad, gap, bool(gap > tol), margin, tol)


def coboundary_transform(potential: Potential, u: Potential) -> Potential:
    """``phi - u + u o sigma`` tabulated at depth ``max(depth_phi, depth_u + 1)``."""
    if not (potential.is_locally_constant and u.is_locally_constant):
        raise InvalidParameter("coboundary_transform needs locally constant tables")
    depth = max(potential.depth, u.depth + 1)
    phi = potential.at_depth(depth)
    return Potential.table(potential.system, depth,
                           lambda w: phi(w) - u(w[: u.depth]) + u(w[1: 1 + u.depth]),
                           name=f"{potential.name}+cob")
