"""Phase-space state, mass handling and energy bookkeeping.

The sampler works on a parameter vector theta of length d that is split into
two disjoint index sets: coordinates in ``smooth_idx`` carry Gaussian momenta
and move along gradient dynamics, coordinates in ``disc_idx`` carry Laplace
momenta and move through coordinate-wise jumps.  The kinetic energy is

    K(p) = 0.5 * p_I' M_I^{-1} p_I  +  sum_j |p_j| / m_j

with I the smooth block and j running over the discontinuous block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DhmcError(Exception):
    """Base class for errors raised by this package."""


class ContractError(DhmcError, ValueError):
    """An argument violates a documented precondition (shape, partition...)."""


class ModelError(DhmcError, ArithmeticError):
    """A target model returned an invalid value (NaN potential, NaN gradient)."""


class OutOfSupportError(DhmcError, ValueError):
    """An embedded value fell outside the knot range of an embedding map."""


class ConfigError(DhmcError, ValueError):
    """A sampler or CLI configuration field is invalid."""


def _as_index_array(idx) -> np.ndarray:
    arr = np.asarray(idx, dtype=np.intp)
    if arr.ndim != 1:
        raise ContractError("index sets must be one-dimensional")
    return arr


@dataclass(frozen=True)
class PhaseState:
    """Position, momentum and the coordinate partition.

    Arrays are copied and frozen at construction; integrator steps return new
    states instead of mutating.  ``smooth_idx`` and ``disc_idx`` must be
    disjoint and together cover ``range(len(theta))``.
    """

    theta: np.ndarray
    p: np.ndarray
    smooth_idx: np.ndarray
    disc_idx: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        p = np.array(self.p, dtype=float)
        smooth = _as_index_array(self.smooth_idx)
        disc = _as_index_array(self.disc_idx)
        if theta.ndim != 1 or p.shape != theta.shape:
            raise ContractError("theta and p must be 1-d arrays of equal length")
        d = theta.shape[0]
        merged = np.concatenate([smooth, disc])
        if len(np.unique(merged)) != d or (len(merged) and (merged.min() < 0 or merged.max() >= d)):
            raise ContractError("smooth_idx and disc_idx must partition range(d)")
        if len(merged) != d:
            raise ContractError("smooth_idx and disc_idx must partition range(d)")
        if not np.all(np.isfinite(theta)) or not np.all(np.isfinite(p)):
            raise ContractError("theta and p must be finite")
        for name, arr in (("theta", theta), ("p", p), ("smooth_idx", smooth), ("disc_idx", disc)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class MassSpec:
    """Mass settings for both blocks.

    The smooth block is either diagonal (``diag_smooth`` holds the diagonal of
    M_I) or dense (``dense_smooth`` holds M_I and ``chol_smooth`` its lower
    Cholesky factor, fixed at construction).  ``m_disc`` holds the Laplace
    scales m_j for the discontinuous block, aligned with ``disc_idx`` order.
    """

    m_disc: np.ndarray
    diag_smooth: np.ndarray | None = None
    dense_smooth: np.ndarray | None = None
    chol_smooth: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        m_disc = np.array(self.m_disc, dtype=float)
        if m_disc.ndim != 1 or np.any(m_disc <= 0) or not np.all(np.isfinite(m_disc)):
            raise ContractError("m_disc must be a 1-d array of positive finite masses")
        m_disc.setflags(write=False)
        object.__setattr__(self, "m_disc", m_disc)
        if self.diag_smooth is not None and self.dense_smooth is not None:
            raise ContractError("supply diag_smooth or dense_smooth, not both")
        if self.diag_smooth is not None:
            diag = np.array(self.diag_smooth, dtype=float)
            if diag.ndim != 1 or np.any(diag <= 0) or not np.all(np.isfinite(diag)):
                raise ContractError("diag_smooth must be positive and finite")
            diag.setflags(write=False)
            object.__setattr__(self, "diag_smooth", diag)
        if self.dense_smooth is not None:
            dense = np.array(self.dense_smooth, dtype=float)
            if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
                raise ContractError("dense_smooth must be a square matrix")
            if not np.allclose(dense, dense.T):
                raise ContractError("dense_smooth must be symmetric")
            chol = self.chol_smooth
            if chol is None:
                try:
                    chol = np.linalg.cholesky(dense)
                except np.linalg.LinAlgError as exc:
                    raise ContractError("dense_smooth must be positive definite") from exc
            chol = np.array(chol, dtype=float)
            dense.setflags(write=False)
            chol.setflags(write=False)
            object.__setattr__(self, "dense_smooth", dense)
            object.__setattr__(self, "chol_smooth", chol)

    @classmethod
    def diagonal(cls, diag_smooth, m_disc) -> "MassSpec":
        return cls(m_disc=np.asarray(m_disc, dtype=float),
                   diag_smooth=np.asarray(diag_smooth, dtype=float))

    @classmethod
    def dense(cls, matrix, m_disc) -> "MassSpec":
        return cls(m_disc=np.asarray(m_disc, dtype=float),
                   dense_smooth=np.asarray(matrix, dtype=float))

    @classmethod
    def unit(cls, n_smooth: int, n_disc: int) -> "MassSpec":
        return cls(m_disc=np.ones(n_disc), diag_smooth=np.ones(n_smooth))

    def check_sizes(self, n_smooth: int, n_disc: int):
        if self.m_disc.shape[0] != n_disc:
            raise ContractError(
                f"m_disc has length {self.m_disc.shape[0]}, expected {n_disc}")
        if self.diag_smooth is not None and self.diag_smooth.shape[0] != n_smooth:
            raise ContractError(
                f"diag_smooth has length {self.diag_smooth.shape[0]}, expected {n_smooth}")
        if self.dense_smooth is not None and self.dense_smooth.shape[0] != n_smooth:
            raise ContractError(
                f"dense_smooth has order {self.dense_smooth.shape[0]}, expected {n_smooth}")
        if self.diag_smooth is None and self.dense_smooth is None and n_smooth > 0:
            raise ContractError("mass for the smooth block is missing")

    def smooth_quad(self, p_smooth: np.ndarray) -> float:
        """Return p' M_I^{-1} p for the smooth block."""
        if p_smooth.shape[0] == 0:
            return 0.0
        if self.diag_smooth is not None:
            return float(np.dot(p_smooth, p_smooth / self.diag_smooth))
        from scipy.linalg import cho_solve
        return float(np.dot(p_smooth, cho_solve((self.chol_smooth, True), p_smooth)))

    def smooth_velocity(self, p_smooth: np.ndarray) -> np.ndarray:
        """Return M_I^{-1} p, the drift velocity of the smooth block."""
        if self.diag_smooth is not None:
            return p_smooth / self.diag_smooth
        from scipy.linalg import cho_solve
        return cho_solve((self.chol_smooth, True), p_smooth)

    def sample_smooth(self, rng: np.random.Generator, n: int) -> np.ndarray:
        z = rng.standard_normal(n)
        if n == 0:
            return z
        if self.diag_smooth is not None:
            return np.sqrt(self.diag_smooth) * z
        return self.chol_smooth @ z


class TargetModel:
    """Contract every target distribution implements.

    Subclasses define

    - ``dim``, ``smooth_idx``, ``disc_idx``: the coordinate partition,
    - ``potential(theta) -> float``: minus log density, finite on the support
      and ``+inf`` off it, never NaN,
    - ``grad_smooth(theta) -> array``: gradient of the potential over the
      smooth block, only queried where the potential is finite,
    - optionally ``potential_diff(theta, j, value) -> float``: the change in
      potential when coordinate j moves to ``value``, cheaper than two full
      potential calls and equal to them up to rounding.

    ``embeddings`` maps a coordinate index to the EmbeddingMap that decodes it
    back to an integer; coordinates absent from the dict are genuinely
    continuous even when they sit in ``disc_idx``.
    """

    dim: int = 0
    name: str = "target"
    potential_diff = None
    embeddings: dict = {}

    @property
    def smooth_idx(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def disc_idx(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def param_names(self) -> list:
        return [f"x{i}" for i in range(self.dim)]

    def potential(self, theta: np.ndarray) -> float:
        raise NotImplementedError

    def grad_smooth(self, theta: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{self.name} does not define a smooth gradient")

    def initial_theta(self, rng: np.random.Generator) -> np.ndarray:
        """A point of finite potential used to start chains."""
        return np.zeros(self.dim)


@dataclass(frozen=True)
class EnergyLedger:
    """Potential, kinetic and total energy of one phase-space point."""

    potential: float
    kinetic: float

    @property
    def hamiltonian(self) -> float:
        return self.potential + self.kinetic


def kinetic_energy(p: np.ndarray, mass: MassSpec, smooth_idx, disc_idx) -> float:
    """Evaluate K(p) for the given partition.

    Gaussian part 0.5 p'M^{-1}p over ``smooth_idx``, Laplace part
    sum |p_j|/m_j over ``disc_idx``.  K is non-negative and convex.
    """
    p = np.asarray(p, dtype=float)
    smooth = _as_index_array(smooth_idx)
    disc = _as_index_array(disc_idx)
    if p.ndim != 1 or len(smooth) + len(disc) != p.shape[0]:
        raise ContractError("partition does not match the momentum length")
    mass.check_sizes(len(smooth), len(disc))
    k = 0.5 * mass.smooth_quad(p[smooth])
    if len(disc):
        k += float(np.sum(np.abs(p[disc]) / mass.m_disc))
    return k


def hamiltonian(model: TargetModel, state: PhaseState, mass: MassSpec) -> EnergyLedger:
    """Evaluate the energy ledger at ``state``; NaN potentials raise ModelError."""
    u = model.potential(state.theta)
    if np.isnan(u):
        raise ModelError(f"{model.name} returned NaN potential")
    k = kinetic_energy(state.p, mass, state.smooth_idx, state.disc_idx)
    return EnergyLedger(potential=float(u), kinetic=k)


def sample_momentum(rng: np.random.Generator, mass: MassSpec,
                    smooth_idx, disc_idx) -> np.ndarray:
    """Draw a fresh momentum: Gaussian N(0, M_I) on the smooth block and
    independent Laplace(scale m_j) on the discontinuous block.

    The Gaussian block is drawn first, then the Laplace block, so the stream
    of random numbers consumed is a deterministic function of the partition
    sizes.  With this kinetic energy |p_j|/m_j is Exp(1) distributed.
    """
    smooth = _as_index_array(smooth_idx)
    disc = _as_index_array(disc_idx)
    mass.check_sizes(len(smooth), len(disc))
    p = np.zeros(len(smooth) + len(disc))
    if len(smooth):
        p[smooth] = mass.sample_smooth(rng, len(smooth))
    if len(disc):
        p[disc] = rng.laplace(0.0, mass.m_disc)
    return p
