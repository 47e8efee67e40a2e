"""Subshifts of finite type, the polynomial shift metric, cylinders and Birkhoff sums.

Points of the one-sided shift are represented by finite words (tuples of ints);
a word of length ``L`` stands for the cylinder of all sequences starting with it.
The metric is ``d(x, y) = n(x, y)**-2`` where ``n(x, y)`` is the (1-based) index
of the first disagreement, so the ball of radius ``eps`` is a cylinder of length
``floor(eps**-0.5)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from .errors import InsufficientData, InvalidParameter, InvalidSystem

Word = tuple


def as_word(symbols) -> Word:
    return tuple(int(s) for s in symbols)


def _primitivity_power(adj: np.ndarray) -> int | None:
    k = adj.shape[0]
    # Wielandt bound on the exponent of a primitive matrix
    limit = (k - 1) ** 2 + 1
    a = (adj > 0).astype(np.int64)
    p = a.copy()
    for power in range(1, limit + 1):
        if np.all(p > 0):
            return power
        p = ((p @ a) > 0).astype(np.int64)
    return None


@dataclass(frozen=True, eq=False)
class SftSystem:
    """One-sided subshift of finite type on ``{0, ..., alphabet_size - 1}``.

    ``strict`` systems must have a 1 in every row and column (every symbol has
    successors and predecessors). Restrictions used as invariant subsets
    (trap models, sub-SFTs) are built with ``strict=False``.
    """

    transitions: np.ndarray
    strict: bool = True
    name: str = ""
    primitivity_power: int | None = field(init=False)

    def __post_init__(self):
        t = np.array(self.transitions, dtype=np.int8)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise InvalidSystem("transition matrix must be square and non-empty")
        if not np.isin(t, (0, 1)).all():
            raise InvalidSystem("transition matrix must be 0/1")
        if self.strict and (not t.any(axis=1).all() or not t.any(axis=0).all()):
            raise InvalidSystem("every row and column of the transition matrix needs a 1")
        t.setflags(write=False)
        object.__setattr__(self, "transitions", t)
        object.__setattr__(self, "primitivity_power", _primitivity_power(t))

    @classmethod
    def full_shift(cls, k: int = 2) -> "SftSystem":
        return cls(np.ones((k, k), dtype=np.int8), name=f"full-{k}-shift")

    @classmethod
    def golden_mean(cls) -> "SftSystem":
        return cls(np.array([[1, 1], [1, 0]]), name="golden-mean")

    @property
    def alphabet_size(self) -> int:
        return self.transitions.shape[0]

    @property
    def is_primitive(self) -> bool:
        return self.primitivity_power is not None

    @property
    def is_full_shift(self) -> bool:
        return bool(self.transitions.all())

    def allowed(self, a: int, b: int) -> bool:
        return bool(self.transitions[a, b])

    def successors(self, a: int) -> list[int]:
        return [int(b) for b in np.flatnonzero(self.transitions[a])]

    def is_admissible(self, word: Sequence[int]) -> bool:
        if len(word) == 0:
            return True
        k = self.alphabet_size
        if any(s < 0 or s >= k for s in word):
            return False
        return all(self.transitions[a, b] for a, b in zip(word, word[1:]))

    def restrict(self, mask, name: str = "") -> "SftSystem":
        """Sub-SFT with transitions ``self.transitions & mask``."""
        mask = np.asarray(mask, dtype=np.int8)
        if mask.shape != self.transitions.shape:
            raise InvalidSystem("restriction mask has the wrong shape")
        return SftSystem(self.transitions & mask, strict=False, name=name)

    def contains(self, other: "SftSystem") -> bool:
        return (other.transitions.shape == self.transitions.shape
                and bool(np.all(other.transitions <= self.transitions)))

    def count_words(self, n: int) -> int:
        if n < 1:
            raise InvalidParameter("word length must be >= 1")
        a = self.transitions.astype(object)
        v = np.ones(self.alphabet_size, dtype=object)
        for _ in range(n - 1):
            v = a @ v
        return int(v.sum())

    def __repr__(self):
        label = self.name or self.transitions.tolist()
        return f"SftSystem({label})"


def enumerate_words(system: SftSystem, n: int) -> Iterator[Word]:
    """Yield every admissible word of length ``n`` once, in lexicographic order."""
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    succ = [system.successors(a) for a in range(system.alphabet_size)]

    def extend(prefix):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in succ[prefix[-1]]:
            prefix.append(b)
            yield from extend(prefix)
            prefix.pop()

    for a in range(system.alphabet_size):
        yield from extend([a])


def word_array(system: SftSystem, n: int, max_rows: int = 1 << 23) -> np.ndarray:
    """All admissible words of length ``n`` as rows of an int8 array, lexicographic."""
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    if system.count_words(n) > max_rows:
        from .errors import ResourceLimit
        raise ResourceLimit(f"{system.count_words(n)} words of length {n} exceed {max_rows}")
    t = system.transitions.astype(bool)
    words = np.arange(system.alphabet_size, dtype=np.int8)[:, None]
    for _ in range(n - 1):
        last = words[:, -1]
        allowed = t[last]  # rows x alphabet
        rows, cols = np.nonzero(allowed)  # row-major: lexicographic
        words = np.concatenate([words[rows], cols.astype(np.int8)[:, None]], axis=1)
    return words


def prefix_length_for_radius(epsilon: float) -> int:
    """Number of leading symbols two points must share to be ``epsilon``-close."""
    if not (0 < epsilon <= 1):
        raise InvalidParameter(f"epsilon must lie in (0, 1], got {epsilon}")
    m = math.floor(epsilon ** -0.5)
    # m is the largest integer with m**-2 >= epsilon; repair float rounding
    while (m + 1) ** -2 >= epsilon:
        m += 1
    while m > 1 and m ** -2 < epsilon:
        m -= 1
    return m


def cylinder_diameter(m: int) -> float:
    """Diameter of a length-``m`` cylinder: nearest disagreement at index m + 1."""
    return (m + 1) ** -2.0


def shift_distance(x: Sequence[int], y: Sequence[int]) -> float:
    """Metric on (finite prefixes of) sequences; 0 if the prefixes agree."""
    for i, (a, b) in enumerate(zip(x, y)):
        if a != b:
            return (i + 1) ** -2.0
    return 0.0


def dynamical_ball_cylinder(x: Sequence[int], n: int, epsilon: float) -> Word:
    """The dynamical ball ``B_eps(x, n)`` as a cylinder word of length ``n + m(eps)``."""
    m = prefix_length_for_radius(epsilon)
    if n < 0:
        raise InvalidParameter("n must be >= 0")
    if len(x) < n + m:
        raise InsufficientData(f"need {n + m} symbols of x, got {len(x)}")
    return as_word(x[: n + m])


class Potential:
    """A continuous potential on an SFT.

    Two kinds exist. ``locally_constant`` potentials are tables over the
    admissible ``depth``-words. ``sampled`` potentials are evaluated on finite
    words by ``sampler`` (the value at some point of the cylinder) and carry a
    non-increasing ``variation_bound(n)``: the oscillation over any n-cylinder.
    """

    def __init__(self, system: SftSystem, kind: str, depth: int = 1, table=None,
                 sampler: Callable | None = None, variation_bound: Callable | None = None,
                 sup_norm: float | None = None, name: str = ""):
        if kind not in ("locally_constant", "sampled"):
            raise InvalidParameter(f"unknown potential kind {kind!r}")
        if depth < 1:
            raise InvalidParameter("depth must be >= 1")
        self.system = system
        self.kind = kind
        self.depth = depth
        self.name = name
        if kind == "locally_constant":
            self._init_table(table)
            self._sup = float(np.max(np.abs(self._values)))
        else:
            if sampler is None or variation_bound is None:
                raise InvalidParameter("sampled potentials need a sampler and a variation bound")
            self.sampler = sampler
            self.variation_bound = variation_bound
            if sup_norm is None:
                raise InvalidParameter("sampled potentials need an explicit sup_norm")
            self._sup = float(sup_norm)

    def _init_table(self, table):
        words = list(enumerate_words(self.system, self.depth))
        self.words = words
        self.index = {w: i for i, w in enumerate(words)}
        if callable(table):
            values = [float(table(w)) for w in words]
        elif isinstance(table, Mapping):
            keys = {as_word(k) for k in table}
            if keys != set(words):
                raise InvalidParameter("table must cover exactly the admissible words of its depth")
            values = [float(table[w]) for w in words]
        else:
            values = np.asarray(table, dtype=float).ravel().tolist()
            if len(values) != len(words):
                raise InvalidParameter(f"expected {len(words)} table values, got {len(values)}")
        if not np.all(np.isfinite(values)):
            raise InvalidParameter("potential values must be finite")
        self._values = np.asarray(values, dtype=float)
        self._values.setflags(write=False)
        # dense lookup by base-a code; inadmissible codes hold NaN
        a = self.system.alphabet_size
        dense = np.full(a ** self.depth, np.nan)
        for w, v in zip(words, values):
            dense[self._code(w)] = v
        self._dense = dense

    def _code(self, w) -> int:
        c = 0
        a = self.system.alphabet_size
        for s in w:
            c = c * a + int(s)
        return c

    # constructors -------------------------------------------------------

    @classmethod
    def table(cls, system, depth, values, name="") -> "Potential":
        return cls(system, "locally_constant", depth=depth, table=values, name=name)

    @classmethod
    def constant(cls, system, c=0.0) -> "Potential":
        return cls.table(system, 1, [c] * system.alphabet_size, name=f"const({c})")

    @classmethod
    def zero(cls, system) -> "Potential":
        return cls.constant(system, 0.0)

    @classmethod
    def symbol_values(cls, system, values, name="") -> "Potential":
        return cls.table(system, 1, list(values), name=name)

    @classmethod
    def log_probabilities(cls, system, p) -> "Potential":
        return cls.symbol_values(system, np.log(np.asarray(p, dtype=float)), name=f"log p={list(p)}")

    @classmethod
    def log_matrix(cls, system, matrix) -> "Potential":
        """Depth-2 potential ``phi(ab) = log M[a, b]`` on admissible pairs."""
        m = np.asarray(matrix, dtype=float)
        return cls.table(system, 2, lambda w: math.log(m[w[0], w[1]]), name="log M")

    @classmethod
    def indicator(cls, system, symbol, value=1.0) -> "Potential":
        return cls.symbol_values(system, [value if a == symbol else 0.0
                                          for a in range(system.alphabet_size)],
                                 name=f"1[x0={symbol}]")

    # evaluation ---------------------------------------------------------

    @property
    def is_locally_constant(self) -> bool:
        return self.kind == "locally_constant"

    @property
    def sup_norm(self) -> float:
        return self._sup

    @property
    def values(self) -> np.ndarray:
        self._require_table()
        return self._values

    def _require_table(self):
        if not self.is_locally_constant:
            raise InvalidParameter("operation needs a locally constant potential")

    def max(self) -> float:
        return float(self._values.max()) if self.is_locally_constant else self._sup

    def min(self) -> float:
        return float(self._values.min()) if self.is_locally_constant else -self._sup

    def __call__(self, word) -> float:
        if self.is_locally_constant:
            if len(word) < self.depth:
                raise InsufficientData(f"potential of depth {self.depth} needs {self.depth} symbols")
            v = self._dense[self._code(word[: self.depth])]
            if np.isnan(v):
                raise InvalidParameter(f"word {tuple(word)} is not admissible")
            return float(v)
        return float(self.sampler(as_word(word)))

    def lookup(self, codes: np.ndarray) -> np.ndarray:
        """Vectorized table lookup on base-a codes of depth-words."""
        return self._dense[codes]

    def variation(self, n: int) -> float:
        """Oscillation over n-cylinders (0 once n reaches the depth)."""
        if self.is_locally_constant:
            if n >= self.depth:
                return 0.0
            return float(self._values.max() - self._values.min()) if n == 0 else self._lc_variation(n)
        return float(self.variation_bound(n))

    def _lc_variation(self, n):
        spread = 0.0
        groups: dict = {}
        for w, v in zip(self.words, self._values):
            lo, hi = groups.get(w[:n], (v, v))
            groups[w[:n]] = (min(lo, v), max(hi, v))
        for lo, hi in groups.values():
            spread = max(spread, hi - lo)
        return spread

    def bowen_constant(self, n: int, length: int | None = None) -> float:
        """Bound on the oscillation of ``S_n phi`` over a cylinder of ``length`` symbols."""
        length = n + self.depth - 1 if length is None else length
        return float(sum(self.variation(length - j) for j in range(n)))

    # algebra -------------------------------------------------------------

    def at_depth(self, depth: int) -> "Potential":
        """Same function tabulated on longer words."""
        self._require_table()
        if depth < self.depth:
            raise InvalidParameter("cannot lower the depth of a table")
        if depth == self.depth:
            return self
        return Potential.table(self.system, depth, lambda w: self(w[: self.depth]), name=self.name)

    def compose_shift(self) -> "Potential":
        """The potential ``u o sigma`` (depth grows by one)."""
        self._require_table()
        return Potential.table(self.system, self.depth + 1, lambda w: self(w[1:]),
                               name=f"({self.name})o sigma")

    def _binary(self, other, op, name):
        if isinstance(other, (int, float)):
            if self.is_locally_constant:
                return Potential.table(self.system, self.depth, op(self._values, float(other)), name=name)
            return Potential(self.system, "sampled", sampler=lambda w: op(self.sampler(w), float(other)),
                             variation_bound=self.variation_bound,
                             sup_norm=abs(op(self._sup, float(other))) + abs(op(0.0, float(other))),
                             name=name)
        if other.system is not self.system and not np.array_equal(
                other.system.transitions, self.system.transitions):
            raise InvalidParameter("potentials live on different systems")
        self._require_table()
        other._require_table()
        d = max(self.depth, other.depth)
        a, b = self.at_depth(d), other.at_depth(d)
        return Potential.table(self.system, d, op(a._values, b._values), name=name)

    def __add__(self, other):
        return self._binary(other, np.add, f"({self.name}+{getattr(other, 'name', other)})")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract, f"({self.name}-{getattr(other, 'name', other)})")

    def __mul__(self, c):
        if not isinstance(c, (int, float)):
            return NotImplemented
        self._require_table()
        return Potential.table(self.system, self.depth, self._values * float(c), name=f"{c}*{self.name}")

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def sup_distance(self, other: "Potential") -> float:
        return (self - other).sup_norm

    def locally_constant_part(self, depth: int, extension: Callable | None = None) -> "Potential":
        """Tabulate a sampled potential at ``depth``; error is ``variation(depth)``."""
        if self.is_locally_constant:
            return self.at_depth(max(depth, self.depth))
        ext = extension or (lambda w: w)
        return Potential.table(self.system, depth, lambda w: self.sampler(ext(w)),
                               name=f"lc{depth}({self.name})")

    def __repr__(self):
        return f"Potential({self.kind}, depth={self.depth}, {self.name})"


def birkhoff_sum(potential: Potential, w: Sequence[int], n: int, with_error: bool = False):
    """``S_n phi`` on the cylinder of ``w``.

    Locally constant potentials need ``len(w) >= n + depth - 1`` and the sum is
    exact. Sampled potentials are evaluated at the center sample of each shifted
    cylinder; the returned error bounds the oscillation over ``[w]``.
    """
    w = as_word(w)
    if n < 0:
        raise InvalidParameter("n must be >= 0")
    if potential.is_locally_constant:
        if len(w) < n + potential.depth - 1:
            raise InsufficientData(f"S_{n} of a depth-{potential.depth} potential needs "
                                   f"{n + potential.depth - 1} symbols, got {len(w)}")
        k = potential.depth
        total = math.fsum(potential(w[j: j + k]) for j in range(n))
        return (total, 0.0) if with_error else total
    if len(w) < n:
        raise InsufficientData(f"S_{n} needs at least {n} symbols")
    total = math.fsum(potential.sampler(w[j:]) for j in range(n))
    err = math.fsum(potential.variation(len(w) - j) for j in range(n))
    return (total, err) if with_error else total
