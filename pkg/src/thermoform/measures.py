"""Measures on SFT cylinders given by exact weights.

Every non-tabulated measure is a "state chain": states are the admissible
words of a fixed length ``s`` and, for ``|w| >= s``,

    weight(w) = start[u_0] * T[u_0, u_1] * ... * T[u_{L-s-1}, u_{L-s}] * end[u_{L-s}]

with ``u_j = w[j:j+s]``. Bernoulli, Markov, conformal and equilibrium
measures all fit this form; shorter words are summed over their extensions.
"""
from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from .errors import InsufficientData, InvalidParameter
from .symbolic import SftSystem, Word, as_word, enumerate_words


class CylinderMeasure:
    """A probability measure on the cylinders of an SFT.

    Parameters
    ----------
    kind : {'bernoulli', 'markov', 'conformal', 'tabulated'}
    system : SftSystem
    states : list of words of common length ``s`` (state-chain kinds)
    start, T, end : arrays defining the state chain
    table : mapping word -> weight at a single depth (tabulated kind)
    """

    def __init__(self, kind: str, system: SftSystem, states=None, start=None, T=None, end=None,
                 table: Mapping | None = None, info: dict | None = None):
        if kind not in ("bernoulli", "markov", "conformal", "tabulated"):
            raise InvalidParameter(f"unknown measure kind {kind!r}")
        self.kind = kind
        self.system = system
        self.info = dict(info or {})
        if kind == "tabulated":
            if not table:
                raise InvalidParameter("tabulated measure needs a table")
            depths = {len(w) for w in table}
            if len(depths) != 1:
                raise InvalidParameter("tabulated weights must share one depth")
            self.depth = depths.pop()
            self._table = {as_word(w): float(v) for w, v in table.items()}
            self.states = None
            return
        self.states = [as_word(u) for u in states]
        self.state_length = len(self.states[0])
        self.index = {u: i for i, u in enumerate(self.states)}
        self.start = np.asarray(start, dtype=float)
        self.T = np.asarray(T, dtype=float)
        self.end = np.asarray(end, dtype=float)
        a = system.alphabet_size
        self._code_to_state = np.full(a ** self.state_length, -1, dtype=np.int64)
        for i, u in enumerate(self.states):
            c = 0
            for sym in u:
                c = c * a + sym
            self._code_to_state[c] = i

    # constructors -------------------------------------------------------

    @classmethod
    def bernoulli(cls, p: Sequence[float], system: SftSystem | None = None) -> "CylinderMeasure":
        p = np.asarray(p, dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
            raise InvalidParameter("Bernoulli weights must be a probability vector")
        system = system or SftSystem.full_shift(len(p))
        k = len(p)
        return cls("bernoulli", system, states=[(a,) for a in range(k)], start=p,
                   T=np.tile(p, (k, 1)), end=np.ones(k), info={"p": p.tolist()})

    @classmethod
    def markov(cls, system: SftSystem, pi, Q, states=None) -> "CylinderMeasure":
        Q = np.asarray(Q, dtype=float)
        pi = np.asarray(pi, dtype=float)
        states = states or [(a,) for a in range(system.alphabet_size)]
        if Q.shape != (len(states), len(states)) or pi.shape != (len(states),):
            raise InvalidParameter("pi and Q must match the number of states")
        if np.any(Q < 0) or np.any(pi < 0):
            raise InvalidParameter("Markov weights must be nonnegative")
        if np.max(np.abs(Q.sum(axis=1) - 1)) > 1e-9 or abs(pi.sum() - 1) > 1e-9:
            raise InvalidParameter("Q must be row-stochastic and pi a probability vector")
        return cls("markov", system, states=states, start=pi, T=Q, end=np.ones(len(pi)))

    # weights --------------------------------------------------------------

    def _state_weight_short(self, w: Word) -> float:
        s = self.state_length
        total = 0.0
        for i, u in enumerate(self.states):
            if u[: len(w)] == w:
                total += self.start[i] * self.end[i]
        return total

    def weight(self, w) -> float:
        w = as_word(w)
        if len(w) == 0:
            return 1.0
        if self.kind == "tabulated":
            if len(w) > self.depth:
                raise InsufficientData(f"tabulated measure only resolves depth {self.depth}")
            if len(w) == self.depth:
                return self._table.get(w, 0.0)
            return math.fsum(v for u, v in self._table.items() if u[: len(w)] == w)
        s = self.state_length
        if len(w) < s:
            return self._state_weight_short(w)
        idx = [self.index.get(w[j: j + s], -1) for j in range(len(w) - s + 1)]
        if min(idx) < 0:
            return 0.0
        value = self.start[idx[0]]
        for i, j in zip(idx, idx[1:]):
            value *= self.T[i, j]
        return float(value * self.end[idx[-1]])

    def log_weight(self, w) -> float:
        w = as_word(w)
        if self.kind == "tabulated" or len(w) < self.state_length:
            v = self.weight(w)
            return math.log(v) if v > 0 else -math.inf
        s = self.state_length
        idx = [self.index.get(w[j: j + s], -1) for j in range(len(w) - s + 1)]
        if min(idx) < 0:
            return -math.inf
        with np.errstate(divide="ignore"):
            terms = [math.log(self.start[idx[0]])]
            terms += [math.log(self.T[i, j]) if self.T[i, j] > 0 else -math.inf
                      for i, j in zip(idx, idx[1:])]
            terms.append(math.log(self.end[idx[-1]]))
        return math.fsum(terms)

    def state_indices(self, words: np.ndarray) -> np.ndarray:
        """State index at each window of each row of ``words`` (-1 if inadmissible)."""
        s = self.state_length
        a = self.system.alphabet_size
        n_rows, length = words.shape
        codes = np.zeros((n_rows, length - s + 1), dtype=np.int64)
        for j in range(s):
            codes = codes * a + words[:, j: length - s + 1 + j]
        return self._code_to_state[codes]

    def log_weights(self, words: np.ndarray) -> np.ndarray:
        """Vectorized log-weights for rows of ``words`` (length >= state length)."""
        if self.kind == "tabulated":
            return np.array([self.log_weight(tuple(r)) for r in words])
        idx = self.state_indices(np.asarray(words, dtype=np.int64))
        with np.errstate(divide="ignore"):
            logT = np.log(self.T)
            out = np.log(self.start)[idx[:, 0]] + np.log(self.end)[idx[:, -1]]
            if idx.shape[1] > 1:
                out = out + logT[idx[:, :-1], idx[:, 1:]].sum(axis=1)
        return out

    def weights(self, n: int) -> dict:
        return {w: self.weight(w) for w in enumerate_words(self.system, n)}

    def total_mass(self) -> float:
        return math.fsum(self.weight((a,)) for a in range(self.system.alphabet_size))

    def additivity_defect(self, max_length: int = 12) -> float:
        """Largest |mu[w] - sum_b mu[wb]| over admissible words up to ``max_length - 1``."""
        worst = abs(self.total_mass() - 1.0)
        for n in range(1, max_length):
            for w in enumerate_words(self.system, n):
                children = math.fsum(self.weight(w + (b,)) for b in self.system.successors(w[-1]))
                worst = max(worst, abs(self.weight(w) - children))
        return worst

    @property
    def stationary(self) -> np.ndarray:
        if self.kind not in ("bernoulli", "markov"):
            raise InvalidParameter("only Markov-type measures have a stationary vector")
        return self.start

    @property
    def stochastic(self) -> np.ndarray:
        if self.kind not in ("bernoulli", "markov"):
            raise InvalidParameter("only Markov-type measures have a stochastic matrix")
        return self.T

    def invariance_defect(self) -> float:
        """``max |pi Q - pi|`` for Markov-type measures."""
        return float(np.max(np.abs(self.start @ self.T - self.start)))

    def is_shift_invariant(self, max_length: int = 10, tol: float = 1e-12) -> bool:
        for n in range(1, max_length + 1):
            for w in enumerate_words(self.system, n):
                pre = math.fsum(self.weight((a,) + w) for a in range(self.system.alphabet_size)
                                if self.system.allowed(a, w[0]))
                if abs(pre - self.weight(w)) > tol:
                    return False
        return True

    def __repr__(self):
        return f"CylinderMeasure({self.kind}, {self.system!r})"


def total_variation(mu: CylinderMeasure, nu: CylinderMeasure, length: int) -> float:
    """Total-variation distance between the length-``length`` marginals."""
    words = list(enumerate_words(mu.system, length))
    return 0.5 * math.fsum(abs(mu.weight(w) - nu.weight(w)) for w in words)
