"""Embedding of integer parameters into the real line.

An integer value n is identified with the half-open cell (a_n, a_{n+1}] of a
strictly increasing knot sequence; cells are right-closed.  A discrete mass
function pi(n) becomes the piecewise-constant density

    pi(x) = pi(n) / (a_{n+1} - a_n)   for x in (a_n, a_{n+1}],

so integrating the embedded density over a cell recovers the original mass.
Uniform knots use unit cells, logarithmic knots give cells whose width shrinks
like 1/n so that multiplicative moves cost a constant step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContractError, OutOfSupportError

__all__ = ["EmbeddingMap", "EmbeddedPrior"]


@dataclass(frozen=True)
class EmbeddingMap:
    """Strictly increasing knots plus the integer values of the cells.

    ``values`` are consecutive integers; ``values[k]`` labels the cell
    ``(knots[k], knots[k+1]]``.  ``kind`` records how the knots were built
    (uniform, log or custom) for reporting only.
    """

    knots: np.ndarray
    values: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        knots = np.array(self.knots, dtype=float)
        values = np.array(self.values, dtype=np.int64)
        if knots.ndim != 1 or len(knots) < 2:
            raise ContractError("need at least two knots")
        if np.any(np.diff(knots) <= 0) or not np.all(np.isfinite(knots)):
            raise ContractError("knots must be finite and strictly increasing")
        if values.shape != (len(knots) - 1,):
            raise ContractError("values must have one entry per cell")
        if len(values) > 1 and np.any(np.diff(values) != 1):
            raise ContractError("cell values must be consecutive integers")
        knots.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, lo: int, hi: int) -> "EmbeddingMap":
        """Unit cells (n, n+1] for each integer n in [lo, hi]."""
        if hi < lo:
            raise ContractError("empty support")
        values = np.arange(lo, hi + 1)
        knots = np.arange(lo, hi + 2, dtype=float)
        return cls(knots=knots, values=values, kind="uniform")

    @classmethod
    def logarithmic(cls, lo: int, hi: int) -> "EmbeddingMap":
        """Cells (log v, log(v+1)] so a fixed step is a multiplicative move.

        Supports with lo < 1 are shifted by 1 - lo before taking logs, which
        keeps every knot finite.
        """
        if hi < lo:
            raise ContractError("empty support")
        shift = 1 - lo if lo < 1 else 0
        values = np.arange(lo, hi + 1)
        knots = np.log(np.arange(lo, hi + 2, dtype=float) + shift)
        return cls(knots=knots, values=values, kind="log")

    @property
    def n_cells(self) -> int:
        return len(self.values)

    @property
    def lo(self) -> int:
        return int(self.values[0])

    @property
    def hi(self) -> int:
        return int(self.values[-1])

    def cell_of(self, x: float) -> int:
        """Index k of the cell containing x, or raise OutOfSupportError."""
        knots = self.knots
        if not x > knots[0] or x > knots[-1]:
            raise OutOfSupportError(
                f"{x!r} outside the embedded support ({knots[0]}, {knots[-1]}]")
        return int(np.searchsorted(knots, x, side="left")) - 1

    def lookup(self, x: float) -> int:
        """Integer value of the cell containing x (cells are right-closed)."""
        return int(self.values[self.cell_of(x)])

    def contains(self, x: float) -> bool:
        return bool(x > self.knots[0]) and bool(x <= self.knots[-1])

    def width(self, n: int) -> float:
        k = n - self.lo
        if k < 0 or k >= self.n_cells:
            raise OutOfSupportError(f"{n} not in [{self.lo}, {self.hi}]")
        return float(self.knots[k + 1] - self.knots[k])

    def embed_center(self, n: int) -> float:
        """Midpoint of the cell of n; lookup(embed_center(n)) == n."""
        k = n - self.lo
        if k < 0 or k >= self.n_cells:
            raise OutOfSupportError(f"{n} not in [{self.lo}, {self.hi}]")
        return float(0.5 * (self.knots[k] + self.knots[k + 1]))

    def decode(self, xs: np.ndarray) -> np.ndarray:
        """Vectorised lookup for an array of embedded values."""
        xs = np.asarray(xs, dtype=float)
        if np.any(~((xs > self.knots[0]) & (xs <= self.knots[-1]))):
            raise OutOfSupportError("embedded values outside the knot range")
        cells = np.searchsorted(self.knots, xs, side="left") - 1
        return self.values[cells]


@dataclass(frozen=True)
class EmbeddedPrior:
    """A discrete mass function pushed through an EmbeddingMap.

    ``log_pmf[k]`` is the unnormalised log mass of cell k.  The embedded log
    density subtracts the log cell width and is -inf off the support.
    """

    emap: EmbeddingMap
    log_pmf: np.ndarray

    def __post_init__(self):
        log_pmf = np.array(self.log_pmf, dtype=float)
        if log_pmf.shape != (self.emap.n_cells,):
            raise ContractError("log_pmf must have one entry per cell")
        if np.any(np.isnan(log_pmf)):
            raise ContractError("log_pmf must not contain NaN")
        log_pmf.setflags(write=False)
        object.__setattr__(self, "log_pmf", log_pmf)

    @classmethod
    def from_probs(cls, emap: EmbeddingMap, probs) -> "EmbeddedPrior":
        probs = np.asarray(probs, dtype=float)
        with np.errstate(divide="ignore"):
            return cls(emap=emap, log_pmf=np.log(probs))

    def log_density(self, x: float) -> float:
        """Embedded log density at x, -inf outside the support."""
        if not self.emap.contains(x):
            return -np.inf
        k = self.emap.cell_of(x)
        return float(self.log_pmf[k] - np.log(self.emap.knots[k + 1] - self.emap.knots[k]))
